"""Problem instances with oracles and metadata.

Synthetic quadratics, least-squares-style logistic regression over
sparse data, and smoothed-max (log-sum-exp) objectives. All randomness
sits behind a named 64-bit seed so instances are bit-identical across
runs. Dense vectors only; sparse data is densified into gradients by
the kernels.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .oracle import Oracle


class DatasetFormatError(ValueError):
    """Malformed dataset file; message carries the 1-based line number."""


@dataclass(frozen=True, eq=False)
class Problem:
    """An objective with whatever metadata is exactly known for it."""

    oracle: Oracle
    dim: int
    L: float | None = None
    f_star: float | None = None
    x_star: np.ndarray | None = None
    label: str = ""

    def meta(self) -> dict:
        return {"label": self.label, "dim": self.dim, "L": self.L, "f_star": self.f_star}


@dataclass(frozen=True, eq=False)
class SparseDataset:
    """CSR-stored rows of (feature, value) pairs with +-1 labels.

    Feature indices are stored 0-based internally; the on-disk format is
    1-based with strictly increasing indices per row.
    """

    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    labels: np.ndarray
    n_features: int

    def __post_init__(self):
        if self.n_features < 1:
            raise ValueError("n_features must be >= 1")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        if len(self.indices) and (self.indices.min() < 0 or self.indices.max() >= self.n_features):
            raise ValueError("feature index out of range")
        for i in range(self.n_samples):
            row = self.indices[self.indptr[i]:self.indptr[i + 1]]
            if len(row) > 1 and not np.all(np.diff(row) > 0):
                raise ValueError(f"row {i}: feature indices not strictly increasing")

    @property
    def n_samples(self) -> int:
        return len(self.labels)

    @property
    def nnz(self) -> int:
        return len(self.data)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_samples, self.n_features))
        for i in range(self.n_samples):
            sl = slice(self.indptr[i], self.indptr[i + 1])
            out[i, self.indices[sl]] = self.data[sl]
        return out


# ---------------------------------------------------------------------------
# quadratics
# ---------------------------------------------------------------------------

def make_quadratic(seed: int, dim: int, cond: float) -> Problem:
    """f(x) = 0.5 x'Ax - b'x with A symmetric positive definite.

    Eigenvalues span [1, cond] exactly (log-spaced, diagonal in a random
    orthogonal basis from a seeded QR factorization), so the gradient
    Lipschitz constant is exactly ``cond``. The minimizer and optimal
    value are computed at construction.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if cond < 1.0:
        raise ValueError("cond must be >= 1")
    rng = np.random.default_rng(seed)
    if cond == 1.0 or dim == 1:
        A = np.eye(dim)
    else:
        q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
        q = q * np.sign(np.diag(r))  # fix the sign convention for determinism
        evals = np.geomspace(1.0, cond, dim)
        evals[0], evals[-1] = 1.0, cond
        A = (q * evals) @ q.T
        A = 0.5 * (A + A.T)
    b = rng.standard_normal(dim)
    x_star = np.linalg.solve(A, b)
    f_star = 0.5 * float(x_star @ (A @ x_star)) - float(b @ x_star)

    def fn(x):
        return kernels.quad_value_grad(A, b, x)

    return Problem(
        oracle=Oracle(fn, dim, label=f"quadratic(seed={seed},dim={dim},cond={cond:g})"),
        dim=dim,
        L=float(cond),
        f_star=f_star,
        x_star=x_star,
        label=f"quadratic_d{dim}_cond{cond:g}_s{seed}",
    )


def identity_quadratic(dim: int) -> Problem:
    """f(x) = 0.5 ||x||^2: L = 1, minimum 0 at the origin.

    Kept free of any linear term so objective values decay with the gap
    and gap targets at the 1e-10 level stay resolvable in doubles.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")

    def fn(x):
        return 0.5 * float(x @ x), x

    return Problem(
        oracle=Oracle(fn, dim, label=f"identity_quadratic(dim={dim})"),
        dim=dim,
        L=1.0,
        f_star=0.0,
        x_star=np.zeros(dim),
        label=f"identity_d{dim}",
    )


# ---------------------------------------------------------------------------
# LIBSVM-format datasets and logistic regression
# ---------------------------------------------------------------------------

def load_libsvm(path, n_features: int | None = None) -> SparseDataset:
    """Parse ``label idx:val idx:val ...`` lines (1-based, ascending).

    Text after '#' is ignored, blank lines are skipped. Labels 0 and -1
    map to -1; labels 1 and +1 map to +1. Malformed lines are reported
    with their 1-based line number.
    """
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    labels: list[float] = []
    max_idx = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                lab = float(tokens[0])
            except ValueError:
                raise DatasetFormatError(f"line {lineno}: non-numeric label {tokens[0]!r}")
            if lab in (0.0, -1.0):
                labels.append(-1.0)
            elif lab == 1.0:
                labels.append(1.0)
            else:
                raise DatasetFormatError(f"line {lineno}: label {tokens[0]!r} out of range")
            prev = 0
            for tok in tokens[1:]:
                idx_s, _, val_s = tok.partition(":")
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise DatasetFormatError(f"line {lineno}: non-numeric token {tok!r}")
                if idx < 1:
                    raise DatasetFormatError(f"line {lineno}: feature index {idx} below 1")
                if idx <= prev:
                    raise DatasetFormatError(f"line {lineno}: nonincreasing indices")
                prev = idx
                indices.append(idx - 1)
                data.append(val)
            indptr.append(len(indices))
            max_idx = max(max_idx, prev)
    if n_features is None:
        n_features = max(max_idx, 1)
    elif max_idx > n_features:
        raise DatasetFormatError(f"feature index {max_idx} exceeds n_features={n_features}")
    return SparseDataset(
        indptr=np.asarray(indptr, dtype=np.int64),
        indices=np.asarray(indices, dtype=np.int64),
        data=np.asarray(data, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.float64),
        n_features=int(n_features),
    )


def save_libsvm(dataset: SparseDataset, path) -> None:
    """Inverse of :func:`load_libsvm`; values keep full precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(dataset.n_samples):
            sl = slice(dataset.indptr[i], dataset.indptr[i + 1])
            parts = [f"{int(dataset.labels[i])}"]
            parts += [
                f"{idx + 1}:{val:.17g}"
                for idx, val in zip(dataset.indices[sl], dataset.data[sl])
            ]
            fh.write(" ".join(parts) + "\n")


def make_classification_dataset(seed: int, n_samples: int, n_features: int,
                                density: float = 1.0) -> SparseDataset:
    """Seeded synthetic two-class dataset with noisy linear labels."""
    if not 0.0 < density <= 1.0:
        raise ValueError("density must be in (0, 1]")
    rng = np.random.default_rng(seed)
    w_true = rng.standard_normal(n_features)
    indptr = [0]
    indices: list[np.ndarray] = []
    data: list[np.ndarray] = []
    labels = np.empty(n_samples)
    for i in range(n_samples):
        k = max(1, rng.binomial(n_features, density))
        idx = np.sort(rng.choice(n_features, size=k, replace=False))
        val = rng.standard_normal(k)
        margin = float(val @ w_true[idx]) + 0.5 * rng.standard_normal()
        labels[i] = 1.0 if margin >= 0.0 else -1.0
        indices.append(idx)
        data.append(val)
        indptr.append(indptr[-1] + k)
    return SparseDataset(
        indptr=np.asarray(indptr, dtype=np.int64),
        indices=np.concatenate(indices).astype(np.int64),
        data=np.concatenate(data),
        labels=labels,
        n_features=n_features,
    )


def _gram_spectral_norm(dataset: SparseDataset, tol: float = 1e-10,
                        max_iters: int = 10_000, seed: int = 0) -> float:
    """Largest eigenvalue of A'A by power iteration on v -> A'(Av)."""
    n, d = dataset.n_samples, dataset.n_features
    row = np.repeat(np.arange(n), np.diff(dataset.indptr))

    def gram_matvec(v):
        av = np.bincount(row, weights=dataset.data * v[dataset.indices], minlength=n)
        return np.bincount(dataset.indices, weights=dataset.data * av[row], minlength=d)

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    lam = 0.0
    change_prev = 0.0
    for it in range(max_iters):
        w = gram_matvec(v)
        lam_new = float(v @ w)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        v = w / nw
        change = abs(lam_new - lam)
        lam = lam_new
        if it >= 1 and lam > 0.0:
            # Rayleigh values converge geometrically; the remaining error
            # is about change * rho / (1 - rho), not the last change alone
            rho = min(change / change_prev, 0.9999) if change_prev > 0.0 else 0.0
            if change + change * rho / (1.0 - rho) <= tol * lam:
                break
        change_prev = change
    # Rayleigh quotients approach the eigenvalue from below; nudge up by
    # the tolerance so downstream bounds never divide by an underestimate
    return lam * (1.0 + tol)


def logistic_problem(data: SparseDataset, reg: float = 0.0) -> Problem:
    """Mean logistic loss plus an optional ridge term.

    The smoothness constant uses the classical bound: spectral norm of
    the data Gram matrix over 4n (power iteration, tolerance 1e-10, at
    most 1e4 iterations) plus the ridge weight. No optimal value is
    attached; estimate one with a long reference run when needed.
    """
    if data.n_samples < 1:
        raise ValueError("empty dataset")
    if reg < 0.0:
        raise ValueError("reg must be nonnegative")
    L = _gram_spectral_norm(data) / (4.0 * data.n_samples) + reg
    indptr, indices, vals, y = data.indptr, data.indices, data.data, data.labels

    def fn(w):
        return kernels.logistic_value_grad(indptr, indices, vals, y, reg, w)

    return Problem(
        oracle=Oracle(fn, data.n_features,
                      label=f"logistic(n={data.n_samples},d={data.n_features},reg={reg:g})"),
        dim=data.n_features,
        L=float(L),
        label=f"logistic_n{data.n_samples}_d{data.n_features}",
    )


# ---------------------------------------------------------------------------
# smoothed max of affine functions
# ---------------------------------------------------------------------------

def logsumexp_problem(seed: int, dim: int, n_terms: int, smoothing: float) -> Problem:
    """f(x) = mu log sum_i exp((a_i'x - b_i)/mu) with seeded (a_i, b_i).

    Local curvature varies by orders of magnitude across the domain,
    which is the regime where adaptive stepsizes pay off. The recorded
    smoothness constant is the upper bound max_i ||a_i||^2 / mu; the
    shifted-exponent evaluation cannot overflow.
    """
    if n_terms < 2:
        raise ValueError("n_terms must be >= 2")
    if not smoothing > 0.0:
        raise ValueError("smoothing must be positive")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n_terms, dim))
    b = rng.standard_normal(n_terms)
    mu = float(smoothing)
    L = float(np.max(np.sum(A * A, axis=1))) / mu

    def fn(x):
        return kernels.logsumexp_value_grad(A, b, mu, x)

    return Problem(
        oracle=Oracle(fn, dim, label=f"logsumexp(seed={seed},dim={dim},terms={n_terms},mu={mu:g})"),
        dim=dim,
        L=L,
        label=f"logsumexp_d{dim}_t{n_terms}_mu{mu:g}_s{seed}",
    )

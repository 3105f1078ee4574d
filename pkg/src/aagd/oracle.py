"""First-order oracle: objective value and gradient in one counted call."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class OracleError(Exception):
    """Base class for oracle failures."""


class DimensionMismatchError(OracleError):
    pass


class NonFiniteError(OracleError):
    """Raised when a query point or an oracle output is not finite."""


@dataclass(frozen=True, eq=False)
class OracleResult:
    """Value and gradient of f at a point, with the query point cached.

    The cached point is what lets curvature estimates be formed later
    without re-querying the oracle.
    """

    value: float
    grad: np.ndarray
    x: np.ndarray


class EvalCounter:
    """Counts combined value+gradient evaluations. One unit per call."""

    __slots__ = ("n_value_grad",)

    def __init__(self) -> None:
        self.n_value_grad = 0

    def add(self, n: int = 1) -> None:
        self.n_value_grad += n

    def __repr__(self) -> str:
        return f"EvalCounter(n_value_grad={self.n_value_grad})"


class Oracle:
    """Wraps a function ``fn(x) -> (value, grad)`` with a fixed dimension.

    Oracles are immutable after construction and safe to share across
    runs; counting is carried by the per-run :class:`EvalCounter` passed
    to :func:`evaluate`.
    """

    __slots__ = ("fn", "dim", "label")

    def __init__(self, fn, dim: int, label: str = "f") -> None:
        if dim < 1:
            raise ValueError("oracle dimension must be >= 1")
        self.fn = fn
        self.dim = int(dim)
        self.label = label

    def __repr__(self) -> str:
        return f"Oracle({self.label!r}, dim={self.dim})"


def evaluate(oracle: Oracle, x, counter: EvalCounter | None = None) -> OracleResult:
    """Evaluate f and grad f at ``x`` in a single call.

    Increments ``counter`` by one when given. Raises
    :class:`DimensionMismatchError` on shape mismatch and
    :class:`NonFiniteError` if the query point or the oracle output is
    not finite (the latter signals a defective or overflowing problem
    instance).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (oracle.dim,):
        raise DimensionMismatchError(
            f"query point has shape {x.shape}, oracle expects ({oracle.dim},)"
        )
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("query point contains non-finite entries")
    with np.errstate(over="ignore", invalid="ignore"):
        value, grad = oracle.fn(x)
    value = float(value)
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != x.shape:
        raise DimensionMismatchError(
            f"oracle returned gradient of shape {grad.shape} for point of shape {x.shape}"
        )
    if not np.isfinite(value) or not np.all(np.isfinite(grad)):
        raise NonFiniteError(f"oracle {oracle.label!r} returned non-finite output")
    if counter is not None:
        counter.add()
    return OracleResult(value, grad, x)


def finite_diff_check(oracle: Oracle, x, h: float | None = None) -> float:
    """Max relative error of the gradient against central differences.

    ``h`` defaults to ``1e-5 * max(1, ||x||_inf)``. Evaluations made here
    are never counted against a solver's :class:`EvalCounter`.
    """
    x = np.asarray(x, dtype=np.float64)
    if h is None:
        h = 1e-5 * max(1.0, float(np.max(np.abs(x))))
    if not h > 0.0:
        raise ValueError("finite-difference step must be positive")
    g = evaluate(oracle, x).grad
    worst = 0.0
    e = np.zeros_like(x)
    for i in range(x.shape[0]):
        e[i] = h
        fp = evaluate(oracle, x + e).value
        fm = evaluate(oracle, x - e).value
        e[i] = 0.0
        fd = (fp - fm) / (2.0 * h)
        err = abs(fd - g[i]) / max(1.0, abs(g[i]))
        if err > worst:
            worst = err
    return worst

"""Adaptive accelerated gradient solver: state machine and run loop.

One iteration performs, in order: the mixing weight update, the gradient
step, the averaging (coupling) step, the extrapolation step, the
lookahead combination, the local curvature estimate, the stepsize and
stepsize-sum update, and the coupling weight update. Exactly two new
oracle evaluations happen per iteration (at the new averaged point and
at the new lookahead point); the result at the current lookahead point
is reused from the previous iteration's cache.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .curvature import bregman, local_curvature
from .oracle import EvalCounter, NonFiniteError, Oracle, OracleResult, evaluate
from .params import SolverParams, validate


class InvalidParamsError(ValueError):
    pass


class DivergenceError(RuntimeError):
    """A non-finite iterate appeared; the run loop records this instead of crashing."""

    def __init__(self, k: int):
        super().__init__(f"non-finite iterate at step {k}")
        self.k = k


@dataclass(frozen=True)
class StopRule:
    """Stopping rules; the iteration cap is always active.

    ``grad_tol`` stops when the gradient norm at the averaged iterate
    falls to the tolerance; ``gap_tol`` stops on the objective gap and
    requires ``f_star``.
    """

    max_iters: int
    grad_tol: float = 0.0
    gap_tol: float | None = None
    f_star: float | None = None

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.grad_tol < 0.0:
            raise ValueError("grad_tol must be nonnegative")
        if self.gap_tol is not None:
            if self.gap_tol < 0.0:
                raise ValueError("gap_tol must be nonnegative")
            if self.f_star is None:
                raise ValueError("gap_tol requires f_star")


@dataclass(frozen=True, eq=False)
class IterState:
    """All per-iteration quantities at index k.

    ``lam`` is nan at k=0 (no curvature estimate exists yet).
    ``bregman_prev`` is the Bregman divergence of the previous
    (averaged; lookahead) pair, the quantity the Lyapunov function needs;
    ``bregman_cur`` is the same divergence for the current pair.
    """

    k: int
    x: np.ndarray
    x_prev: np.ndarray
    x_bar: np.ndarray
    x_tilde: np.ndarray
    x_hat: np.ndarray
    eta: float
    eta_prev: float
    H: float
    H_prev: float
    alpha: float
    beta: float
    lam: float
    tilde_res: OracleResult
    bar_res: OracleResult
    bregman_prev: float
    bregman_cur: float


@dataclass
class Trace:
    """Recorded scalars (always) and iterates (optional) of one run.

    The lam column stores nan both at k=0 (undefined) and where the
    curvature estimate took its infinite branch; the two serialize
    identically and no check distinguishes them.
    """

    k: np.ndarray
    eta: np.ndarray
    H: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    lam: np.ndarray
    f_bar: np.ndarray
    f_tilde: np.ndarray
    grad_norm_tilde: np.ndarray
    evals_cum: np.ndarray
    x: np.ndarray | None = None
    x_bar: np.ndarray | None = None
    x_tilde: np.ndarray | None = None
    params: SolverParams | None = None
    method: str = ""
    problem: dict = field(default_factory=dict)
    diverged: bool = False
    notes: list = field(default_factory=list)

    @property
    def n_iters(self) -> int:
        return len(self.k) - 1

    @property
    def has_iterates(self) -> bool:
        return self.x is not None


class _TraceBuilder:
    _SCALARS = ("k", "eta", "H", "alpha", "beta", "lam", "f_bar", "f_tilde",
                "grad_norm_tilde", "evals_cum")

    def __init__(self, store_iterates: bool):
        self.cols = {name: [] for name in self._SCALARS}
        self.store_iterates = store_iterates
        self.x, self.x_bar, self.x_tilde = [], [], []

    def record(self, state: IterState, counter: EvalCounter):
        c = self.cols
        c["k"].append(state.k)
        c["eta"].append(state.eta)
        c["H"].append(state.H)
        c["alpha"].append(state.alpha)
        c["beta"].append(state.beta)
        c["lam"].append(math.nan if math.isinf(state.lam) else state.lam)
        c["f_bar"].append(state.bar_res.value)
        c["f_tilde"].append(state.tilde_res.value)
        c["grad_norm_tilde"].append(float(np.linalg.norm(state.tilde_res.grad)))
        c["evals_cum"].append(counter.n_value_grad)
        if self.store_iterates:
            self.x.append(state.x)
            self.x_bar.append(state.x_bar)
            self.x_tilde.append(state.x_tilde)

    def build(self, **kwargs) -> Trace:
        arrays = {
            name: np.asarray(vals, dtype=np.int64 if name in ("k", "evals_cum") else np.float64)
            for name, vals in self.cols.items()
        }
        if self.store_iterates:
            arrays["x"] = np.asarray(self.x)
            arrays["x_bar"] = np.asarray(self.x_bar)
            arrays["x_tilde"] = np.asarray(self.x_tilde)
        return Trace(**arrays, **kwargs)


def init(x0, params: SolverParams, oracle: Oracle,
         counter: EvalCounter | None = None, check_params: bool = True) -> IterState:
    """State at k=0: unit weights, sums seeded with eta0, all points at x0.

    Performs one oracle evaluation at x0, cached as both the lookahead
    and the averaged result.
    """
    if check_params:
        report = validate(params)
        if not report.passed:
            raise InvalidParamsError(
                "invalid solver parameters:\n" + "\n".join(report.lines())
            )
    x0 = np.asarray(x0, dtype=np.float64)
    res = evaluate(oracle, x0, counter)
    return IterState(
        k=0,
        x=x0,
        x_prev=x0,
        x_bar=x0,
        x_tilde=x0,
        x_hat=x0,  # the extrapolated point is first formed at k=1
        eta=params.eta0,
        eta_prev=params.eta0,
        H=params.eta0,
        H_prev=params.eta0,
        alpha=1.0,
        beta=1.0,
        lam=math.nan,
        tilde_res=res,
        bar_res=res,
        bregman_prev=0.0,
        bregman_cur=0.0,
    )


def step(state: IterState, oracle: Oracle, params: SolverParams,
         counter: EvalCounter | None = None, growth_cap: bool = False) -> IterState:
    """One transition k -> k+1, exactly two new oracle evaluations.

    With ``growth_cap`` the geometric growth branch (1+gamma) eta_k is
    replaced by (1+1/k) eta_k for k >= 1; the first step keeps the
    geometric branch since the cap is undefined at k=0.
    """
    th, ga, nu = params.theta, params.gamma, params.nu
    grow = (1.0 + ga) * state.eta
    alpha_next = grow / (state.H + grow)

    with np.errstate(over="ignore", invalid="ignore"):
        x_next, xbar_next, xhat_next, xt_next = kernels.step_update(
            state.x, state.x_bar, state.x_tilde, state.tilde_res.grad,
            state.eta, state.beta, th, alpha_next,
        )
    if not (
        np.all(np.isfinite(x_next))
        and np.all(np.isfinite(xbar_next))
        and np.all(np.isfinite(xt_next))
    ):
        raise DivergenceError(state.k + 1)

    bar_res = evaluate(oracle, xbar_next, counter)
    tilde_res = evaluate(oracle, xt_next, counter)
    lam_next = local_curvature(bar_res, state.tilde_res, tilde_res)

    if growth_cap and state.k >= 1:
        grow = (state.k + 1.0) / state.k * state.eta
    eta_next = min(grow, nu * state.H_prev * lam_next / state.eta_prev)
    H_next = state.H + eta_next
    beta_next = eta_next / (alpha_next * H_next)
    if beta_next > 1.0:
        # analytically beta <= 1 always, with equality on the growth
        # branch; rounding can overshoot by ulps
        beta_next = 1.0

    return IterState(
        k=state.k + 1,
        x=x_next,
        x_prev=state.x,
        x_bar=xbar_next,
        x_tilde=xt_next,
        x_hat=xhat_next,
        eta=eta_next,
        eta_prev=state.eta,
        H=H_next,
        H_prev=state.H,
        alpha=alpha_next,
        beta=beta_next,
        lam=lam_next,
        tilde_res=tilde_res,
        bar_res=bar_res,
        bregman_prev=state.bregman_cur,
        bregman_cur=bregman(bar_res, tilde_res),
    )


def _stop_satisfied(state: IterState, stop: StopRule) -> bool:
    if state.k >= stop.max_iters:
        return True
    if float(np.linalg.norm(state.bar_res.grad)) <= stop.grad_tol:
        return True
    if stop.gap_tol is not None and state.bar_res.value - stop.f_star <= stop.gap_tol:
        return True
    return False


def run(oracle: Oracle, x0, params: SolverParams, stop: StopRule,
        growth_cap: bool = False, store_iterates: bool = False,
        problem_meta: dict | None = None, check_params: bool = True) -> Trace:
    """Run the solver until the first satisfied stop rule.

    The reported solution is the averaged iterate of the last recorded
    state. A non-finite iterate (or an oracle overflow) terminates the
    run with ``trace.diverged`` set instead of raising, so parameter
    sweeps survive bad configurations.
    """
    counter = EvalCounter()
    builder = _TraceBuilder(store_iterates)
    notes: list = []
    diverged = False

    state = init(x0, params, oracle, counter, check_params=check_params)
    builder.record(state, counter)
    while not _stop_satisfied(state, stop):
        try:
            state = step(state, oracle, params, counter, growth_cap=growth_cap)
        except (DivergenceError, NonFiniteError) as exc:
            diverged = True
            notes.append((state.k + 1, f"divergence: {exc}"))
            break
        builder.record(state, counter)

    return builder.build(
        params=params,
        method="aagd" + ("+cap" if growth_cap else ""),
        problem=dict(problem_meta or {}),
        diverged=diverged,
        notes=notes,
    )

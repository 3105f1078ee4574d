"""Comparison methods sharing the oracle and trace infrastructure.

Fixed-step gradient descent, Nesterov's accelerated method, and plain
gradient descent driven by four stepsize rules: adaptive secant-based
growth, scalar adagrad normalization, the two-point secant ratio, and
the optimal-value ratio. Trace columns that do not apply to a method
are left as nan and serialize to empty cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curvature import lambda_option1, lambda_option2
from .oracle import EvalCounter, NonFiniteError, Oracle, evaluate
from .solver import StopRule, Trace, _TraceBuilder

KINDS = ("gd", "agd", "adgd", "adagrad", "bb", "polyak")


@dataclass(frozen=True)
class BaselineMethod:
    """A baseline kind plus its hyperparameters.

    gd/agd need a stepsize ``eta`` (typically 1/L); adagrad uses ``eta``
    as its scale. adgd and bb start from ``eta0``; adgd takes growth
    constants ``gamma`` and ``nu`` (defaults follow common practice and
    are not tied to any guarantee) and can switch its secant estimate to
    the Bregman form with ``option2``. polyak needs the optimal value.
    """

    kind: str
    eta: float | None = None
    eta0: float | None = None
    gamma: float = 1.0
    nu: float = 0.5
    option2: bool = False
    f_star: float | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown baseline kind {self.kind!r}")
        if self.kind in ("gd", "agd", "adagrad") and not (self.eta and self.eta > 0.0):
            raise ValueError(f"{self.kind} requires a positive stepsize eta")
        if self.kind in ("adgd", "bb") and not (self.eta0 and self.eta0 > 0.0):
            raise ValueError(f"{self.kind} requires a positive initial stepsize eta0")
        if self.kind == "adgd" and not (self.gamma > 0.0 and self.nu > 0.0):
            raise ValueError("adgd requires positive gamma and nu")
        if self.kind == "polyak" and self.f_star is None:
            raise ValueError("polyak requires f_star")

    @property
    def name(self) -> str:
        return self.label or self.kind


def adgd_stepsize(eta: float, eta_prev: float, lam: float, gamma: float, nu: float) -> float:
    """min of the gated growth branch and the curvature branch.

    An infinite curvature estimate resolves to the growth branch.
    """
    if not (eta > 0.0 and eta_prev > 0.0):
        raise ValueError("stepsizes must be positive")
    grow = eta * math.sqrt(1.0 + gamma * eta / eta_prev)
    return min(grow, nu * lam)


def adagrad_stepsize(eta_scale: float, sq_grad_sum: float) -> float:
    """eta / sqrt(sum of squared gradient norms). Zero sum means converged."""
    if sq_grad_sum < 0.0:
        raise ValueError("sq_grad_sum must be nonnegative")
    if sq_grad_sum == 0.0:
        return 0.0
    return eta_scale / math.sqrt(sq_grad_sum)


def bb_stepsize(dx: np.ndarray, dg: np.ndarray, guard: float = 0.0) -> float:
    """Secant ratio <dx, dg> / ||dg||^2; undefined for a vanishing dg."""
    dg2 = float(dg @ dg)
    if dg2 <= guard:
        raise ZeroDivisionError("gradient difference too small for a secant step")
    return float(dx @ dg) / dg2


def run_baseline(method: BaselineMethod, oracle: Oracle, x0, stop: StopRule) -> Trace:
    """Run a baseline and record a trace in the shared scalar schema.

    f_bar holds the objective at the method's solution estimate, and
    grad_norm_tilde the gradient norm at that estimate. The stepsize
    column holds the stepsize applied at that iteration.
    """
    counter = EvalCounter()
    rows = _BaselineRecorder()
    x = np.asarray(x0, dtype=np.float64)
    res = evaluate(oracle, x, counter)
    notes: list = []
    diverged = False

    try:
        if method.kind == "gd":
            _loop_simple(method, oracle, stop, counter, rows, res,
                         lambda state: method.eta)
        elif method.kind == "adagrad":
            acc = {"sum": 0.0}

            def eta_fn(state):
                acc["sum"] += float(state.grad @ state.grad)
                return adagrad_stepsize(method.eta, acc["sum"])

            _loop_simple(method, oracle, stop, counter, rows, res, eta_fn)
        elif method.kind == "polyak":

            def eta_fn(state):
                g2 = float(state.grad @ state.grad)
                gap = state.value - method.f_star
                if g2 == 0.0 or gap <= 0.0:
                    return 0.0
                return gap / g2

            _loop_simple(method, oracle, stop, counter, rows, res, eta_fn)
        elif method.kind == "bb":
            _loop_bb(method, oracle, stop, counter, rows, res, notes)
        elif method.kind == "adgd":
            _loop_adgd(method, oracle, stop, counter, rows, res)
        elif method.kind == "agd":
            _loop_agd(method, oracle, stop, counter, rows, res)
    except NonFiniteError as exc:
        diverged = True
        notes.append((len(rows.cols["k"]), f"divergence: {exc}"))

    return rows.build(method=method.name, notes=notes, diverged=diverged)


class _BaselineRecorder(_TraceBuilder):
    def __init__(self):
        super().__init__(store_iterates=False)

    def add(self, k, eta, f, grad_norm, counter, lam=math.nan):
        c = self.cols
        c["k"].append(k)
        c["eta"].append(eta)
        c["H"].append(math.nan)
        c["alpha"].append(math.nan)
        c["beta"].append(math.nan)
        c["lam"].append(math.nan if math.isinf(lam) else lam)
        c["f_bar"].append(f)
        c["f_tilde"].append(math.nan)
        c["grad_norm_tilde"].append(grad_norm)
        c["evals_cum"].append(counter.n_value_grad)


def _grad_norm(res):
    return float(np.linalg.norm(res.grad))


def _stopped(k, res, stop: StopRule) -> bool:
    if k >= stop.max_iters:
        return True
    if _grad_norm(res) <= stop.grad_tol:
        return True
    if stop.gap_tol is not None and res.value - stop.f_star <= stop.gap_tol:
        return True
    return False


def _loop_simple(method, oracle, stop, counter, rows, res, eta_fn):
    """Plain gradient iteration with a per-step scalar stepsize."""
    k = 0
    while True:
        eta = eta_fn(res)
        rows.add(k, eta, res.value, _grad_norm(res), counter)
        if _stopped(k, res, stop) or eta == 0.0:
            break
        res = evaluate(oracle, res.x - eta * res.grad, counter)
        k += 1


def _loop_bb(method, oracle, stop, counter, rows, res, notes):
    eta = method.eta0
    prev = None
    k = 0
    while True:
        if prev is not None:
            try:
                cand = bb_stepsize(res.x - prev.x, res.grad - prev.grad)
            except ZeroDivisionError:
                cand = -1.0
            if cand > 0.0:
                eta = cand
            else:
                notes.append((k, "bb stepsize undefined or nonpositive, kept previous"))
        rows.add(k, eta, res.value, _grad_norm(res), counter)
        if _stopped(k, res, stop):
            break
        prev = res
        res = evaluate(oracle, res.x - eta * res.grad, counter)
        k += 1


def _loop_adgd(method, oracle, stop, counter, rows, res):
    estimator = lambda_option2 if method.option2 else lambda_option1
    eta = eta_prev = method.eta0
    prev = None
    k = 0
    while True:
        if prev is not None:
            lam = estimator(res, prev)
            eta, eta_prev = adgd_stepsize(eta, eta_prev, lam, method.gamma, method.nu), eta
        else:
            lam = math.nan
        rows.add(k, eta, res.value, _grad_norm(res), counter, lam=lam)
        if _stopped(k, res, stop):
            break
        prev = res
        res = evaluate(oracle, res.x - eta * res.grad, counter)
        k += 1


def _loop_agd(method, oracle, stop, counter, rows, res):
    """Nesterov acceleration in the three-sequence form with weights 2/(k+2).

    Imported external scheme; per iteration it spends one evaluation at
    the query point and one at the new solution estimate for the trace.
    """
    eta = method.eta
    x = res.x
    z = res.x
    k = 0
    while True:
        rows.add(k, eta, res.value, _grad_norm(res), counter)
        if _stopped(k, res, stop):
            break
        tau = 2.0 / (k + 2.0)
        y = (1.0 - tau) * x + tau * z
        gy = evaluate(oracle, y, counter)
        x = y - eta * gy.grad
        z = z - (eta / tau) * gy.grad
        res = evaluate(oracle, x, counter)
        k += 1

"""Benchmark the numba kernels against their pure-numpy fallbacks.

Times each hot kernel on representative desk-scale inputs and a full
solver run on a synthetic logistic problem, printing one table row per
case with the speedup. Runnable as ``python -m aagd.bench`` or via the
``aagd bench`` subcommand.
"""
from __future__ import annotations

import time

import numpy as np

from . import kernels

_CASES = []


def _register(name, make_args, nb_fn, np_fn):
    _CASES.append((name, make_args, nb_fn, np_fn))


def _quad_args():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((200, 200))
    A = A @ A.T + 200 * np.eye(200)
    return A, rng.standard_normal(200), rng.standard_normal(200)


def _logistic_args():
    from .problems import make_classification_dataset

    data = make_classification_dataset(0, 1000, 50)
    w = np.random.default_rng(1).standard_normal(50)
    return data.indptr, data.indices, data.data, data.labels, 1e-3, w


def _logsumexp_args():
    rng = np.random.default_rng(2)
    return rng.standard_normal((100, 40)), rng.standard_normal(100), 0.1, rng.standard_normal(40)


def _step_args():
    rng = np.random.default_rng(3)
    vecs = [rng.standard_normal(100) for _ in range(4)]
    return (*vecs, 0.01, 0.5, 2.0, 0.3)


_register("quad_value_grad d=200", _quad_args,
          kernels.quad_value_grad_nb, kernels.quad_value_grad_np)
_register("logistic n=1000 d=50", _logistic_args,
          kernels.logistic_value_grad_nb, kernels.logistic_value_grad_np)
_register("logsumexp n=100 d=40", _logsumexp_args,
          kernels.logsumexp_value_grad_nb, kernels.logsumexp_value_grad_np)
_register("step_update d=100", _step_args,
          kernels.step_update_nb, kernels.step_update_np)


def _time(fn, args, repeats, inner=200):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def _solver_case(repeats):
    """End-to-end solver timing on a logistic problem, per backend."""
    from .params import default_params
    from .problems import logistic_problem, make_classification_dataset
    from .solver import StopRule, run

    data = make_classification_dataset(0, 500, 30)
    results = {}
    for backend in ("numba", "numpy"):
        if backend == "numba" and not kernels.quad_value_grad_nb:
            continue
        fn_pair = {
            "numba": kernels.logistic_value_grad_nb,
            "numpy": kernels.logistic_value_grad_np,
        }[backend]
        step_pair = {
            "numba": kernels.step_update_nb,
            "numpy": kernels.step_update_np,
        }[backend]
        saved = (kernels.logistic_value_grad, kernels.step_update)
        kernels.logistic_value_grad, kernels.step_update = fn_pair, step_pair
        try:
            problem = logistic_problem(data, reg=1e-3)
            params = default_params(eta0=1e-6)
            run(problem.oracle, np.zeros(problem.dim), params,
                StopRule(max_iters=50))  # warm the jit before timing
            best = float("inf")
            for _ in range(repeats):
                t0 = time.perf_counter()
                run(problem.oracle, np.zeros(problem.dim), params,
                    StopRule(max_iters=500))
                best = min(best, time.perf_counter() - t0)
            results[backend] = best
        finally:
            kernels.logistic_value_grad, kernels.step_update = saved
    return results


def main(repeats: int = 5) -> int:
    print(f"active backend: {kernels.BACKEND}")
    if not kernels.quad_value_grad_nb:
        print("numba unavailable or disabled (AAGD_PURE_NUMPY set); "
              "only numpy timings shown")
    header = f"{'kernel':<26} {'numpy':>12} {'numba':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, make_args, nb_fn, np_fn in _CASES:
        args = make_args()
        t_np = _time(np_fn, args, repeats)
        if nb_fn is not None:
            nb_fn(*args)  # compile outside the timed region
            t_nb = _time(nb_fn, args, repeats)
            print(f"{name:<26} {t_np * 1e6:>10.2f}us {t_nb * 1e6:>10.2f}us "
                  f"{t_np / t_nb:>8.2f}x")
        else:
            print(f"{name:<26} {t_np * 1e6:>10.2f}us {'-':>12} {'-':>9}")

    solver_times = _solver_case(repeats)
    if "numpy" in solver_times:
        line = f"{'solver 500 iters':<26} {solver_times['numpy'] * 1e3:>10.2f}ms"
        if "numba" in solver_times:
            line += (f" {solver_times['numba'] * 1e3:>10.2f}ms "
                     f"{solver_times['numpy'] / solver_times['numba']:>8.2f}x")
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

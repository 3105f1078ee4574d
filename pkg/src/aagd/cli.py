"""Command-line experiment runner.

Subcommands: ``run`` executes a config-driven experiment and writes one
trace CSV per (problem, method) cell plus a summary; ``params`` solves
and validates the solver constants for a given extrapolation parameter;
``check`` replays the certificate suite on a stored trace; ``bench``
times the numba kernels against their numpy fallbacks.

Exit codes: 0 success, 1 certificate failure, 2 config error, 3 run
divergence.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import baselines, diagnostics, problems, solver, traceio
from .config import ConfigError, ExperimentConfig, MethodSpec, parse_config
from .params import (InfeasibleThetaError, SolverParams, make_params, max_gamma,
                     nu_from, rate_constants, validate)

EXIT_OK = 0
EXIT_CERT_FAIL = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def build_problem(spec: dict, default_seed: int) -> problems.Problem:
    kind = spec["kind"]
    seed = spec.get("seed", default_seed)
    if kind == "quadratic":
        return problems.make_quadratic(seed, spec["dim"], spec["cond"])
    if kind == "identity":
        return problems.identity_quadratic(spec["dim"])
    if kind == "logistic":
        if "path" in spec:
            data = problems.load_libsvm(spec["path"])
        else:
            data = problems.make_classification_dataset(seed, spec["n"], spec["dim"])
        return problems.logistic_problem(data, reg=spec.get("reg", 0.0))
    if kind == "logsumexp":
        return problems.logsumexp_problem(seed, spec["dim"], spec["terms"], spec["smoothing"])
    raise ConfigError(f"unknown problem kind {kind!r}")


def _stop_rule(opts: dict, problem: problems.Problem) -> solver.StopRule:
    gap_tol = opts.get("gap_tol")
    if gap_tol is not None and problem.f_star is None:
        raise ConfigError("gap_tol requires a problem with a known optimal value")
    return solver.StopRule(
        max_iters=opts["max_iters"],
        grad_tol=opts.get("grad_tol", 0.0),
        gap_tol=gap_tol,
        f_star=problem.f_star if gap_tol is not None else None,
    )


def _method_params(spec: MethodSpec, eta0: float) -> SolverParams:
    theta = spec.options.get("theta", 2.0)
    gamma = spec.options.get("gamma")
    return make_params(theta=theta, gamma=gamma, eta0=eta0)


def _resolve_eta(opts: dict, problem: problems.Problem) -> float:
    eta = opts["eta"]
    if eta == "auto":
        if problem.L is None:
            raise ConfigError("eta = auto requires a problem with known L")
        return 1.0 / problem.L
    return float(eta)


def _start_point(spec: dict, problem: problems.Problem, seed: int) -> np.ndarray:
    name = spec.get("x0", "zeros")
    if name == "ones":
        return np.ones(problem.dim)
    if name == "random":
        return np.random.default_rng(seed).standard_normal(problem.dim)
    return np.zeros(problem.dim)


def run_method(spec: MethodSpec, problem: problems.Problem,
               x0: np.ndarray) -> solver.Trace:
    stop = _stop_rule(spec.options, problem)
    if spec.kind == "aagd":
        params = _method_params(spec, spec.options["eta0"])
        trace = solver.run(
            problem.oracle, x0, params, stop,
            growth_cap=spec.options.get("growth_cap", False),
            store_iterates=spec.options.get("store_iterates", False),
            problem_meta=problem.meta(),
        )
    else:
        method = baselines.BaselineMethod(
            kind=spec.kind,
            eta=_resolve_eta(spec.options, problem) if "eta" in spec.options else None,
            eta0=spec.options.get("eta0"),
            gamma=spec.options.get("gamma", 1.0),
            nu=spec.options.get("nu", 0.5),
            option2=spec.options.get("option2", False),
            f_star=problem.f_star if spec.kind == "polyak" else None,
            label=spec.name,
        )
        trace = baselines.run_baseline(method, problem.oracle, x0, stop)
        trace.problem = problem.meta()
    trace.method = spec.name
    return trace


def _reference_points(names, problem: problems.Problem, x0: np.ndarray,
                      seed: int, notes: list):
    rng = np.random.default_rng(seed + 1)
    refs = {}
    for name in names:
        if name == "xstar":
            if problem.x_star is None:
                notes.append("x_ref xstar skipped: problem has no known optimum")
                continue
            refs["xstar"] = problem.x_star
        elif name == "x0":
            refs["x0"] = x0
        elif name == "random":
            refs["random"] = rng.standard_normal(problem.dim)
    return refs


def cmd_run(config_path: str) -> int:
    try:
        cfg = parse_config(config_path)
        if cfg.outdir is None:
            raise ConfigError("experiment: outdir is required for run")
        problem = build_problem(cfg.problem, cfg.seed)
    except (ConfigError, OSError, problems.DatasetFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    summary: list[str] = [f"problem: {problem.label} (dim={problem.dim}, L={problem.L})"]
    notes: list[str] = []
    any_diverged = False
    certs_passed = True

    x0 = _start_point(cfg.problem, problem, cfg.seed)
    for spec in cfg.methods:
        try:
            trace = run_method(spec, problem, x0)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        csv_path = outdir / f"{problem.label}__{spec.name}.csv"
        traceio.write_csv(trace, csv_path)
        final_f = trace.f_bar[-1]
        line = (f"{spec.name:<16} iters={trace.n_iters:<6} evals={trace.evals_cum[-1]:<8} "
                f"f_final={final_f:.12e}")
        if problem.f_star is not None:
            line += f" gap={final_f - problem.f_star:.6e}"
        if trace.diverged:
            line += "  DIVERGED"
            any_diverged = True
        summary.append(line)

        if spec.kind == "aagd" and not trace.diverged and cfg.checks:
            refs = _reference_points(cfg.x_ref, problem, x0, cfg.seed, notes)
            try:
                report = diagnostics.run_certificates(
                    trace, problem.oracle, trace.params, L=problem.L,
                    x_refs=refs, checks=cfg.checks)
            except diagnostics.MissingIteratesError as exc:
                print(f"config error: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            summary.extend("  " + ln for ln in report.lines())
            if not report.passed:
                certs_passed = False

    summary.extend(notes)
    text = "\n".join(summary) + "\n"
    (outdir / "summary.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    if any_diverged:
        return EXIT_DIVERGED
    return EXIT_OK if certs_passed else EXIT_CERT_FAIL


def cmd_params(theta: float, gamma: float | None) -> int:
    try:
        gmax = max_gamma(theta)
    except InfeasibleThetaError as exc:
        print(f"infeasible: {exc}")
        return EXIT_CONFIG
    chosen = gamma if gamma is not None else gmax
    try:
        params = make_params(theta=theta, gamma=chosen, eta0=1.0)
    except ValueError as exc:
        print(f"infeasible: {exc}")
        return EXIT_CONFIG
    report = validate(params)
    print(f"theta      = {theta:.17g}")
    print(f"gamma_max  = {gmax:.17g}")
    print(f"gamma      = {params.gamma:.17g}")
    print(f"nu         = {params.nu:.17g}")
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_CONFIG


def cmd_check(trace_path: str, config_path: str) -> int:
    try:
        cfg = parse_config(config_path)
        problem = build_problem(cfg.problem, cfg.seed)
        trace = traceio.read_csv(trace_path)
    except (ConfigError, OSError, problems.DatasetFormatError,
            traceio.TraceSchemaError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    aagd_specs = [m for m in cfg.methods if m.kind == "aagd"]
    if not aagd_specs:
        print("config error: check needs an aagd method section for the parameters",
              file=sys.stderr)
        return EXIT_CONFIG
    params = _method_params(aagd_specs[0], float(trace.eta[0]))

    notes: list[str] = []
    x0 = trace.x[0] if trace.has_iterates else _start_point(cfg.problem, problem, cfg.seed)
    refs = _reference_points(cfg.x_ref, problem, x0, cfg.seed, notes)
    try:
        report = diagnostics.run_certificates(
            trace, problem.oracle, params, L=problem.L, x_refs=refs, checks=cfg.checks)
    except diagnostics.MissingIteratesError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for line in report.lines():
        print(line)
    for note in notes:
        print(note)
    return EXIT_OK if report.passed else EXIT_CERT_FAIL


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="aagd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a config-driven experiment")
    p_run.add_argument("config", help="experiment config file")

    p_params = sub.add_parser("params", help="solve and validate solver constants")
    p_params.add_argument("--theta", type=float, required=True)
    p_params.add_argument("--gamma", type=float, default=None)

    p_check = sub.add_parser("check", help="replay certificates on a stored trace")
    p_check.add_argument("trace", help="trace CSV file")
    p_check.add_argument("--config", required=True, help="config with the problem spec")

    p_bench = sub.add_parser("bench", help="compare numba kernels with numpy fallbacks")
    p_bench.add_argument("--repeats", type=int, default=5)

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config)
    if args.command == "params":
        return cmd_params(args.theta, args.gamma)
    if args.command == "check":
        return cmd_check(args.trace, args.config)
    if args.command == "bench":
        from . import bench

        return bench.main(repeats=args.repeats)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

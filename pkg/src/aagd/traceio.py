"""Trace serialization to CSV.

Columns, in order: k, eta, H, alpha, beta, lambda, f_bar, f_tilde,
grad_norm_tilde, evals_cum, then x_0..x_{d-1}, xbar_0.., xtilde_0..
when the trace stores iterates. Floats are written with 17 significant
digits so a parse of an emitted file reproduces every scalar bit-exactly.
A non-finite lambda (the estimator's infinite branch, or undefined at
k=0) and every other non-applicable field serialize to an empty cell,
which reads back as nan.
"""
from __future__ import annotations

import csv
import math

import numpy as np

from .solver import Trace

SCALAR_COLUMNS = ("k", "eta", "H", "alpha", "beta", "lambda", "f_bar",
                  "f_tilde", "grad_norm_tilde", "evals_cum")
_INT_COLUMNS = ("k", "evals_cum")


class TraceSchemaError(ValueError):
    pass


def _fmt(v: float) -> str:
    return "" if not math.isfinite(v) else format(v, ".17g")


def write_csv(trace: Trace, path) -> None:
    header = list(SCALAR_COLUMNS)
    if trace.has_iterates:
        d = trace.x.shape[1]
        header += [f"x_{i}" for i in range(d)]
        header += [f"xbar_{i}" for i in range(d)]
        header += [f"xtilde_{i}" for i in range(d)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in range(len(trace.k)):
            row = [str(int(trace.k[r])), _fmt(trace.eta[r]), _fmt(trace.H[r]),
                   _fmt(trace.alpha[r]), _fmt(trace.beta[r]), _fmt(trace.lam[r]),
                   _fmt(trace.f_bar[r]), _fmt(trace.f_tilde[r]),
                   _fmt(trace.grad_norm_tilde[r]), str(int(trace.evals_cum[r]))]
            if trace.has_iterates:
                row += [_fmt(v) for v in trace.x[r]]
                row += [_fmt(v) for v in trace.x_bar[r]]
                row += [_fmt(v) for v in trace.x_tilde[r]]
            writer.writerow(row)


def _parse_float(cell: str) -> float:
    return math.nan if cell == "" else float(cell)


def read_csv(path) -> Trace:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceSchemaError("empty trace file")
        rows = [row for row in reader if row]

    if tuple(header[: len(SCALAR_COLUMNS)]) != SCALAR_COLUMNS:
        raise TraceSchemaError(
            f"unexpected columns {header[:len(SCALAR_COLUMNS)]}, "
            f"want {list(SCALAR_COLUMNS)}"
        )
    extra = header[len(SCALAR_COLUMNS):]
    d, has_iterates = 0, False
    if extra:
        if len(extra) % 3 != 0:
            raise TraceSchemaError("iterate columns must come in three blocks")
        d = len(extra) // 3
        want = ([f"x_{i}" for i in range(d)] + [f"xbar_{i}" for i in range(d)]
                + [f"xtilde_{i}" for i in range(d)])
        if extra != want:
            raise TraceSchemaError("unexpected iterate column names")
        has_iterates = True

    n = len(rows)
    cols = {name: np.empty(n) for name in SCALAR_COLUMNS}
    x = np.empty((n, d)) if has_iterates else None
    x_bar = np.empty((n, d)) if has_iterates else None
    x_tilde = np.empty((n, d)) if has_iterates else None
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise TraceSchemaError(f"row {r + 2}: expected {len(header)} cells, got {len(row)}")
        try:
            for j, name in enumerate(SCALAR_COLUMNS):
                cols[name][r] = _parse_float(row[j])
            if has_iterates:
                base = len(SCALAR_COLUMNS)
                x[r] = [_parse_float(c) for c in row[base:base + d]]
                x_bar[r] = [_parse_float(c) for c in row[base + d:base + 2 * d]]
                x_tilde[r] = [_parse_float(c) for c in row[base + 2 * d:base + 3 * d]]
        except ValueError as exc:
            raise TraceSchemaError(f"row {r + 2}: {exc}")

    return Trace(
        k=cols["k"].astype(np.int64),
        eta=cols["eta"], H=cols["H"], alpha=cols["alpha"], beta=cols["beta"],
        lam=cols["lambda"], f_bar=cols["f_bar"], f_tilde=cols["f_tilde"],
        grad_norm_tilde=cols["grad_norm_tilde"],
        evals_cum=cols["evals_cum"].astype(np.int64),
        x=x, x_bar=x_bar, x_tilde=x_tilde,
    )

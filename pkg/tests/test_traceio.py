import math

import numpy as np
import pytest

from aagd import (BaselineMethod, StopRule, default_params, identity_quadratic,
                  read_csv, run, run_baseline, write_csv)
from aagd.traceio import SCALAR_COLUMNS, TraceSchemaError


def _assert_scalar_equal(a, b):
    assert np.array_equal(a, b, equal_nan=True)


def test_round_trip_bit_exact_with_iterates(tmp_path):
    p = identity_quadratic(4)
    tr = run(p.oracle, np.ones(4), default_params(eta0=0.1),
             StopRule(max_iters=60), store_iterates=True)
    path = tmp_path / "t.csv"
    write_csv(tr, path)
    back = read_csv(path)
    for name in ("eta", "H", "alpha", "beta", "lam", "f_bar", "f_tilde",
                 "grad_norm_tilde"):
        _assert_scalar_equal(getattr(back, name), getattr(tr, name))
    assert np.array_equal(back.k, tr.k)
    assert np.array_equal(back.evals_cum, tr.evals_cum)
    assert np.array_equal(back.x, tr.x)
    assert np.array_equal(back.x_bar, tr.x_bar)
    assert np.array_equal(back.x_tilde, tr.x_tilde)


def test_round_trip_baseline_trace(tmp_path):
    p = identity_quadratic(3)
    tr = run_baseline(BaselineMethod(kind="gd", eta=0.3), p.oracle, np.ones(3),
                      StopRule(max_iters=20))
    path = tmp_path / "b.csv"
    write_csv(tr, path)
    back = read_csv(path)
    for name in ("eta", "H", "alpha", "beta", "lam", "f_bar", "f_tilde",
                 "grad_norm_tilde"):
        _assert_scalar_equal(getattr(back, name), getattr(tr, name))


def test_header_and_empty_lambda_cell(tmp_path):
    p = identity_quadratic(2)
    tr = run(p.oracle, np.ones(2), default_params(eta0=0.1), StopRule(max_iters=3))
    path = tmp_path / "t.csv"
    write_csv(tr, path)
    lines = path.read_text().splitlines()
    assert lines[0].split(",")[:10] == list(SCALAR_COLUMNS)
    # lambda is undefined at k=0: empty cell
    assert lines[1].split(",")[5] == ""


def test_seventeen_digit_round_trip(tmp_path):
    # an unfriendly float must survive exactly
    p = identity_quadratic(1)
    tr = run(p.oracle, np.array([0.1 + 1e-17]), default_params(eta0=1.0 / 3.0),
             StopRule(max_iters=2), store_iterates=True)
    path = tmp_path / "t.csv"
    write_csv(tr, path)
    back = read_csv(path)
    assert back.eta[0] == 1.0 / 3.0
    assert np.array_equal(back.x, tr.x)


def test_schema_rejects_wrong_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(TraceSchemaError):
        read_csv(path)


def test_schema_rejects_ragged_rows(tmp_path):
    p = identity_quadratic(2)
    tr = run(p.oracle, np.ones(2), default_params(eta0=0.1), StopRule(max_iters=2))
    path = tmp_path / "t.csv"
    write_csv(tr, path)
    lines = path.read_text().splitlines()
    lines[1] += ",42"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(TraceSchemaError):
        read_csv(path)


def test_schema_rejects_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(TraceSchemaError):
        read_csv(path)


def test_schema_rejects_bad_iterate_block(tmp_path):
    p = identity_quadratic(2)
    tr = run(p.oracle, np.ones(2), default_params(eta0=0.1), StopRule(max_iters=2),
             store_iterates=True)
    path = tmp_path / "t.csv"
    write_csv(tr, path)
    text = path.read_text().replace("xtilde_1", "oops_1")
    path.write_text(text)
    with pytest.raises(TraceSchemaError):
        read_csv(path)

import numpy as np
import pytest

from aagd import (DatasetFormatError, evaluate, finite_diff_check,
                  identity_quadratic, load_libsvm, logistic_problem,
                  logsumexp_problem, make_classification_dataset, make_quadratic,
                  save_libsvm)
from aagd.kernels import logsumexp_value_grad_np
from aagd.problems import SparseDataset, _gram_spectral_norm

ALL_PROBLEMS = [
    identity_quadratic(10),
    make_quadratic(7, 40, 1e4),
    logistic_problem(make_classification_dataset(11, 150, 15), reg=1e-3),
    logsumexp_problem(3, 12, 30, 0.1),
]
IDS = ["identity", "quadratic", "logistic", "logsumexp"]


def test_quadratic_cond_one_is_identity_matrix():
    p = make_quadratic(0, 6, 1.0)
    x = np.random.default_rng(1).standard_normal(6)
    b = -evaluate(p.oracle, np.zeros(6)).grad
    assert np.array_equal(evaluate(p.oracle, x).grad, x - b)
    assert p.L == 1.0


def test_quadratic_deterministic_across_constructions():
    p1 = make_quadratic(42, 25, 300.0)
    p2 = make_quadratic(42, 25, 300.0)
    x = np.random.default_rng(3).standard_normal(25)
    r1, r2 = evaluate(p1.oracle, x), evaluate(p2.oracle, x)
    assert r1.value == r2.value
    assert np.array_equal(r1.grad, r2.grad)
    assert np.array_equal(p1.x_star, p2.x_star)


def test_quadratic_rejects_bad_cond():
    with pytest.raises(ValueError):
        make_quadratic(0, 5, 0.5)


@pytest.mark.parametrize("problem", ALL_PROBLEMS, ids=IDS)
def test_lipschitz_pairs(problem):
    rng = np.random.default_rng(123)
    L = problem.L
    for _ in range(1000):
        x = rng.standard_normal(problem.dim)
        z = rng.standard_normal(problem.dim)
        gx = evaluate(problem.oracle, x).grad
        gz = evaluate(problem.oracle, z).grad
        assert np.linalg.norm(gx - gz) <= L * (1.0 + 1e-9) * np.linalg.norm(x - z)


@pytest.mark.parametrize("problem", [p for p in ALL_PROBLEMS if p.x_star is not None],
                         ids=["identity", "quadratic"])
def test_x_star_is_stationary(problem):
    g = evaluate(problem.oracle, problem.x_star).grad
    assert np.linalg.norm(g) <= 1e-8 * (1.0 + problem.L)


def test_quadratic_gap_two_ways_agree():
    p = make_quadratic(7, 40, 1e4)
    g_star = evaluate(p.oracle, p.x_star).grad
    rng = np.random.default_rng(5)
    for _ in range(200):
        x = rng.standard_normal(40)
        gap_direct = evaluate(p.oracle, x).value - p.f_star
        d = x - p.x_star
        gap_quadform = 0.5 * float(d @ (evaluate(p.oracle, x).grad - g_star))
        assert gap_quadform == pytest.approx(gap_direct, rel=1e-10)


@pytest.mark.parametrize("problem", ALL_PROBLEMS, ids=IDS)
def test_finite_diff_twenty_points(problem):
    rng = np.random.default_rng(77)
    for _ in range(20):
        assert finite_diff_check(problem.oracle, rng.standard_normal(problem.dim)) <= 1e-5


# ---------------------------------------------------------------------------
# LIBSVM parsing
# ---------------------------------------------------------------------------

def test_load_libsvm_basic(tmp_path):
    f = tmp_path / "d.txt"
    f.write_text("1 1:0.5 3:2.0\n-1 2:1e-3\n")
    data = load_libsvm(f)
    assert data.n_samples == 2
    assert list(data.labels) == [1.0, -1.0]
    assert data.n_features == 3
    dense = data.to_dense()
    assert np.array_equal(dense[0], [0.5, 0.0, 2.0])
    assert np.array_equal(dense[1], [0.0, 1e-3, 0.0])


def test_load_libsvm_label_mapping_and_comments(tmp_path):
    f = tmp_path / "d.txt"
    f.write_text("# header comment\n0 1:1.0\n\n+1 1:2.0  # trailing\n-1 1:3.0\n")
    data = load_libsvm(f)
    assert list(data.labels) == [-1.0, 1.0, -1.0]


def test_load_libsvm_nonincreasing_indices(tmp_path):
    f = tmp_path / "d.txt"
    f.write_text("1 3:1 2:1\n")
    with pytest.raises(DatasetFormatError, match="line 1"):
        load_libsvm(f)


def test_load_libsvm_bad_label(tmp_path):
    f = tmp_path / "d.txt"
    f.write_text("1 1:1.0\n7 1:1.0\n")
    with pytest.raises(DatasetFormatError, match="line 2"):
        load_libsvm(f)


def test_load_libsvm_bad_token(tmp_path):
    f = tmp_path / "d.txt"
    f.write_text("1 1:abc\n")
    with pytest.raises(DatasetFormatError, match="line 1"):
        load_libsvm(f)


def test_libsvm_round_trip(tmp_path):
    data = make_classification_dataset(13, 80, 12, density=0.4)
    path = tmp_path / "rt.txt"
    save_libsvm(data, path)
    back = load_libsvm(path, n_features=12)
    assert np.array_equal(back.indptr, data.indptr)
    assert np.array_equal(back.indices, data.indices)
    assert np.array_equal(back.data, data.data)
    assert np.array_equal(back.labels, data.labels)


def test_sparse_dataset_validation():
    with pytest.raises(ValueError):
        SparseDataset(np.array([0, 2]), np.array([1, 0]), np.ones(2),
                      np.array([1.0]), 2)  # decreasing indices in a row
    with pytest.raises(ValueError):
        SparseDataset(np.array([0, 1]), np.array([0]), np.ones(1),
                      np.array([2.0]), 1)  # bad label
    with pytest.raises(ValueError):
        SparseDataset(np.array([0, 1]), np.array([5]), np.ones(1),
                      np.array([1.0]), 2)  # index out of range


# ---------------------------------------------------------------------------
# logistic regression
# ---------------------------------------------------------------------------

def test_logistic_value_at_zero_is_log_two():
    p = logistic_problem(make_classification_dataset(5, 50, 8), reg=0.0)
    assert evaluate(p.oracle, np.zeros(8)).value == pytest.approx(np.log(2.0), rel=1e-14)


def test_logistic_single_sample_gradient():
    data = SparseDataset(np.array([0, 1]), np.array([0]), np.array([1.0]),
                         np.array([1.0]), 3)
    p = logistic_problem(data, reg=0.0)
    g = evaluate(p.oracle, np.zeros(3)).grad
    assert np.allclose(g, [-0.5, 0.0, 0.0], atol=1e-16)


def test_logistic_L_at_least_reg():
    p = logistic_problem(make_classification_dataset(5, 50, 8), reg=0.7)
    assert p.L >= 0.7


def test_logistic_rejects_empty():
    empty = SparseDataset(np.array([0]), np.array([], dtype=np.int64),
                          np.array([]), np.array([]), 3)
    with pytest.raises(ValueError):
        logistic_problem(empty)


def test_power_iteration_matches_svd():
    data = make_classification_dataset(21, 120, 15)
    lam = _gram_spectral_norm(data)
    sigma = np.linalg.svd(data.to_dense(), compute_uv=False)[0]
    assert lam == pytest.approx(sigma**2, rel=1e-9)


# ---------------------------------------------------------------------------
# smoothed max of affine terms
# ---------------------------------------------------------------------------

def test_logsumexp_symmetric_pair():
    # terms {x, -x} with unit smoothing: value log 2 and zero gradient at 0
    A = np.array([[1.0], [-1.0]])
    b = np.zeros(2)
    value, grad = logsumexp_value_grad_np(A, b, 1.0, np.zeros(1))
    assert value == pytest.approx(np.log(2.0), rel=1e-15)
    assert grad[0] == 0.0


def test_logsumexp_no_overflow_on_large_spread():
    A = 1e3 * np.random.default_rng(0).standard_normal((20, 5))
    b = np.zeros(20)
    value, grad = logsumexp_value_grad_np(A, b, 0.01, 50.0 * np.ones(5))
    assert np.isfinite(value)
    assert np.all(np.isfinite(grad))


def test_logsumexp_large_smoothing_gradient_check():
    p = logsumexp_problem(9, 6, 15, smoothing=50.0)
    rng = np.random.default_rng(4)
    for _ in range(5):
        assert finite_diff_check(p.oracle, rng.standard_normal(6), h=1e-5) <= 1e-5


def test_logsumexp_validation():
    with pytest.raises(ValueError):
        logsumexp_problem(0, 4, 1, 0.1)
    with pytest.raises(ValueError):
        logsumexp_problem(0, 4, 5, 0.0)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sindyc import (DataError, ParamError, ParetoCurve, lasso, least_squares, pareto_sweep,
                    stlsq)
from helpers import planted_stlsq_trial


def test_ls_mean():
    assert least_squares(np.ones((1, 6)), np.full(6, 5.0)) == pytest.approx([5.0])


def test_ls_identity():
    np.testing.assert_allclose(least_squares(np.eye(2), [3.0, 4.0]), [3, 4], atol=1e-14)


def test_ls_orthonormal_rows():
    rng = np.random.default_rng(0)
    Q = np.linalg.qr(rng.standard_normal((20, 4)))[0].T
    y = rng.standard_normal(20)
    np.testing.assert_allclose(least_squares(Q, y), y @ Q.T, atol=1e-12)


def test_ls_non_finite():
    with pytest.raises(DataError):
        least_squares(np.ones((1, 3)), [1.0, np.nan, 2.0])


def test_lasso_zero_alpha_is_ls():
    rng = np.random.default_rng(1)
    th = rng.standard_normal((4, 50))
    y = rng.standard_normal(50)
    np.testing.assert_allclose(lasso(th, y, 0.0), least_squares(th, y), atol=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 40), st.floats(0.1, 5.0), st.floats(-3, 3), st.floats(0, 20),
       st.integers(0, 1000))
def test_lasso_single_row_soft_threshold(m, c, beta, alpha, seed):
    rng = np.random.default_rng(seed)
    row = rng.standard_normal(m)
    row *= np.sqrt(m * c) / np.linalg.norm(row)
    y = beta * row + 0.1 * rng.standard_normal(m)
    nsq = row @ row
    b_ls = (row @ y) / nsq
    expect = np.sign(b_ls) * max(abs(b_ls) - alpha / nsq, 0.0)
    assert lasso(row[None, :], y, alpha)[0] == pytest.approx(expect, abs=1e-10)


def test_lasso_large_alpha_gives_zero():
    rng = np.random.default_rng(2)
    th = rng.standard_normal((5, 30))
    y = rng.standard_normal(30)
    np.testing.assert_array_equal(lasso(th, y, np.max(np.abs(th @ y))), 0.0)


def test_lasso_negative_alpha():
    with pytest.raises(ParamError):
        lasso(np.ones((1, 3)), np.ones(3), -1.0)


def test_lasso_optimality_conditions():
    rng = np.random.default_rng(4)
    th = rng.standard_normal((6, 80))
    y = th[0] * 2 - th[3] + 0.3 * rng.standard_normal(80)
    alpha = 5.0
    xi = lasso(th, y, alpha)
    grad = th @ (y - xi @ th)
    on = xi != 0
    np.testing.assert_allclose(grad[on], alpha * np.sign(xi[on]), atol=1e-6)
    assert np.all(np.abs(grad[~on]) <= alpha + 1e-6)


def test_stlsq_zero_threshold_is_ls():
    rng = np.random.default_rng(5)
    th = rng.standard_normal((5, 40))
    Y = rng.standard_normal((3, 40))
    np.testing.assert_allclose(stlsq(th, Y, 0.0).values, least_squares(th, Y), atol=1e-12)


def test_stlsq_drops_small_term():
    rng = np.random.default_rng(6)
    Q = np.linalg.qr(rng.standard_normal((30, 2)))[0].T
    y = 2 * Q[0] + 0.01 * Q[1]
    xi = stlsq(Q, y, 0.1).values[0]
    assert xi[1] == 0 and xi[0] == pytest.approx(2.0, abs=1e-10)


def test_stlsq_exact_recovery_in_span():
    rng = np.random.default_rng(8)
    th = rng.standard_normal((8, 60))
    planted = np.zeros(8)
    planted[[1, 4, 6]] = [0.7, -1.3, 2.2]
    xi = stlsq(th, planted @ th, 0.5).values[0]
    np.testing.assert_allclose(xi, planted, atol=1e-10)


def test_stlsq_normalized_threshold_units():
    # a tiny-scale row with a large coefficient survives only in raw units
    rng = np.random.default_rng(9)
    th = rng.standard_normal((2, 50))
    th[1] *= 1e-3
    y = th[0] + 50 * th[1]
    raw = stlsq(th, y, 1.0).values[0]
    scaled = stlsq(th, y, 1.0, normalize=True).values[0]
    assert raw[1] != 0 and scaled[1] == 0


def test_stlsq_planted_support_trials():
    for seed in range(100):
        xi, planted = planted_stlsq_trial(seed)
        assert np.array_equal(xi != 0, planted != 0), seed
        np.testing.assert_allclose(xi, planted, atol=1e-10)


def synthetic(seed=0, m=400, noise=0.0):
    rng = np.random.default_rng(seed)
    th = rng.standard_normal((10, m))
    xi = np.zeros((2, 10))
    xi[0, [0, 3]] = [1.5, -0.8]
    xi[1, [2, 5, 7]] = [0.6, 1.1, -2.0]
    return th, xi @ th + noise * rng.standard_normal((2, m)), xi


def test_pareto_single_alpha():
    th, y, _ = synthetic()
    curve = pareto_sweep(th, y, [0.1])
    assert len(curve.points) == 1 and curve.selected == 0


def test_pareto_noiseless_selects_truth():
    th, y, xi = synthetic()
    curve = pareto_sweep(th, y, np.geomspace(1e-4, 1e3, 15))
    assert curve.best.nnz == 5
    assert curve.best.validation_error < 1e-6
    np.testing.assert_allclose(curve.best_coefficients.values, xi, atol=1e-8)


def test_pareto_pure_noise_large_alpha_is_empty():
    rng = np.random.default_rng(3)
    th = rng.standard_normal((6, 200))
    y = rng.standard_normal((1, 200))
    for solver in ("stlsq", "lasso"):
        curve = pareto_sweep(th, y, np.geomspace(1e-6, 1e3, 10), solver=solver, refine=False)
        assert curve.points[-1].nnz == 0


def test_pareto_nnz_non_increasing_for_stlsq():
    th, y, _ = synthetic(noise=0.05)
    curve = pareto_sweep(th, y, np.geomspace(1e-3, 1e2, 12))
    assert np.all(np.diff(curve.nnz) <= 0)


def test_pareto_errors():
    th, y, _ = synthetic()
    with pytest.raises(ParamError):
        pareto_sweep(th, y, [])
    with pytest.raises(ParamError):
        pareto_sweep(th, y, [1.0, 0.5])


def test_pareto_csv_round_trip(tmp_path):
    th, y, _ = synthetic(noise=0.01)
    curve = pareto_sweep(th, y, np.geomspace(1e-3, 10, 6), refine=False)
    curve.to_csv(tmp_path / "p.csv")
    back = ParetoCurve.from_csv(tmp_path / "p.csv")
    assert back.points == curve.points and back.selected == curve.selected

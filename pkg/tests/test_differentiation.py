import numpy as np
import pytest

from sindyc import (DataError, ParamError, SizeError, TimeSeries, central_difference,
                    differentiate, tv_derivative)
from sindyc.differentiation import cumulative_trapezoid, tv_objective


def series(t, *rows):
    return TimeSeries(t, np.vstack(rows))


def test_central_ramp_exact():
    t = np.linspace(0, 2, 21)
    d = central_difference(series(t, 3 * t)).values
    np.testing.assert_allclose(d, 3.0, rtol=0, atol=1e-12)


def test_central_quadratic_interior():
    t = np.arange(0, 1.0001, 0.1)
    d = central_difference(series(t, t ** 2)).values
    assert d[0, 1] == pytest.approx(0.2, abs=1e-12)


def test_central_sine():
    t = np.arange(-100, 101) * 0.01
    d = central_difference(series(t, np.sin(t))).values
    assert abs(d[0, 100] - 1.0) < 1e-4


def test_central_needs_three_samples():
    with pytest.raises(SizeError):
        central_difference(series([0.0, 1.0], [1.0, 2.0]))


def test_central_second_order():
    errs = []
    for n in (51, 101):
        t = np.linspace(0, 1, n)
        errs.append(np.max(np.abs(central_difference(series(t, np.exp(t))).values - np.exp(t))))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_central_linear_in_signal():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 1, 40)
    a, b = rng.standard_normal((2, 40))
    da = central_difference(series(t, a)).values
    db = central_difference(series(t, b)).values
    dab = central_difference(series(t, 2 * a - 3 * b)).values
    np.testing.assert_allclose(dab, 2 * da - 3 * db, atol=1e-9)


def test_tv_ramp():
    t = np.linspace(0, 1, 101)
    v = tv_derivative(3 * t, t[1] - t[0], reg=1e-3, iterations=100)
    np.testing.assert_allclose(v, 3.0, atol=1e-3)


def test_tv_constant_signal():
    v = tv_derivative(np.full(50, 4.2), 0.1, reg=1e-2, iterations=50)
    np.testing.assert_allclose(v, 0.0, atol=1e-8)


def test_tv_beats_central_on_noisy_kink():
    rng = np.random.default_rng(7)
    dt = 0.01
    t = np.arange(0, 2 + dt / 2, dt)
    f = np.abs(t - 1.0) + rng.uniform(-0.01, 0.01, t.size)
    truth = np.sign(t - 1.0)
    tv = tv_derivative(f, dt, reg=1e-2, iterations=200)
    cd = np.gradient(f, dt, edge_order=2)
    mid = np.abs(t - 1.0) > 0.05  # the kink itself is undefined
    rms = lambda e: np.sqrt(np.mean(e[mid] ** 2))  # noqa: E731
    assert rms(tv - truth) < rms(cd - truth)


def test_tv_objective_never_increases():
    rng = np.random.default_rng(3)
    t = np.linspace(0, 3, 300)
    f = np.sin(2 * t) + 0.05 * rng.standard_normal(t.size)
    _, hist = tv_derivative(f, t[1] - t[0], reg=5e-2, iterations=60, return_history=True)
    assert np.all(np.diff(hist) <= 1e-9 * np.abs(hist[:-1]) + 1e-14)


def test_tv_returns_lowest_objective():
    t = np.linspace(0, 1, 80)
    f = t ** 3
    dt = t[1] - t[0]
    v, hist = tv_derivative(f, dt, reg=1e-3, iterations=20, return_history=True)
    assert tv_objective(v, f - f[0], dt, 1e-3) == pytest.approx(hist.min())


@pytest.mark.parametrize("reg", [0.0, -1.0])
def test_tv_bad_weight(reg):
    with pytest.raises(ParamError):
        tv_derivative(np.arange(10.0), 0.1, reg=reg)


def test_tv_non_finite():
    f = np.arange(10.0)
    f[3] = np.inf
    with pytest.raises(DataError):
        tv_derivative(f, 0.1)


def test_cumulative_trapezoid_exact_for_linear():
    t = np.linspace(0, 2, 11)
    np.testing.assert_allclose(cumulative_trapezoid(2 * t + 1, t[1] - t[0]), t ** 2 + t,
                               atol=1e-12)


def test_differentiate_dispatch():
    t = np.linspace(0, 1, 30)
    s = series(t, 3 * t, -t)
    np.testing.assert_allclose(differentiate(s, "central").values, [[3] * 30, [-1] * 30],
                               atol=1e-12)
    d = differentiate(s, "tv", tv_lambda=1e-3, tv_iters=20)
    assert d.values.shape == s.states.shape and d.method["method"] == "tv"


def test_differentiate_tv_on_noisy_lorenz_shape():
    from sindyc import make_system, rk4_integrate
    rhs, _, x0 = make_system("lorenz")
    s = rk4_integrate(rhs, x0, t_span=1.0, dt=0.005)
    noisy = TimeSeries(s.times, s.states + 0.01 * np.random.default_rng(0).standard_normal(
        s.states.shape))
    d = differentiate(noisy, "tv", tv_lambda=1e-2, tv_iters=10)
    assert d.values.shape == s.states.shape and np.all(np.isfinite(d.values))


def test_differentiate_errors():
    s = series(np.linspace(0, 1, 10), np.arange(10.0))
    with pytest.raises(ParamError):
        differentiate(s, "tv", tv_lambda=0)
    with pytest.raises(ParamError):
        differentiate(s, "spline")

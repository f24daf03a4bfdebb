import numpy as np
import pytest
from scipy import integrate as sci

from wavelab.errors import DomainError, InvalidParam
from wavelab.kernels import A, KernelParams
from wavelab.profiles import bump, bump_d2, make_profile
from wavelab.solver1d import (
    CauchyData1D,
    QuadConfig,
    convergence_study,
    domain_of_dependence,
    grid_half_width,
    solve_exact,
    solve_fd,
)


def g(x):
    return bump(x)


def test_quad_config_validation():
    with pytest.raises(InvalidParam):
        QuadConfig(abs_tol=0)
    with pytest.raises(InvalidParam):
        CauchyData1D(R=0)


def test_initial_time_returns_u0():
    data = CauchyData1D(u0=g, u1=g)
    for ell in [0.0, 1.0]:
        assert solve_exact(0.0, 0.3, data, KernelParams(ell)) == g(np.array([0.3]))[0]
    with pytest.raises(DomainError):
        solve_exact(-1.0, 0.0, data, KernelParams(1))


@pytest.mark.parametrize("t,x", [(0.5, 0.0), (1.3, 0.7), (2.0, -1.5), (3.0, 2.9)])
def test_dalembert_velocity(t, x):
    data = CauchyData1D(u1=g)
    ref, _ = sci.quad(g, x - t, x + t, points=[-1, 1], epsabs=1e-13, limit=200)
    assert solve_exact(t, x, data, KernelParams(0)) == pytest.approx(0.5 * ref, abs=1e-10)


@pytest.mark.parametrize("t,x", [(0.5, 0.0), (1.3, 0.7), (2.0, -1.5)])
def test_dalembert_position(t, x):
    data = CauchyData1D(u0=g)
    ref = 0.5 * (g(np.array([x - t]))[0] + g(np.array([x + t]))[0])
    assert solve_exact(t, x, data, KernelParams(0)) == pytest.approx(ref, abs=1e-12)


def test_duhamel_source():
    def f(b, x):
        return np.exp(-b) * bump(x)

    data = CauchyData1D(f=f)
    t, x = 1.2, 0.4
    ref, _ = sci.dblquad(lambda y, b: f(b, y), 0, t, lambda b: x - (t - b), lambda b: x + (t - b), epsabs=1e-12)
    assert solve_exact(t, x, data, KernelParams(0)) == pytest.approx(0.5 * ref, abs=1e-10)


def test_nonnegativity_and_comparison():
    params = KernelParams(1.0)

    def f(b, x):
        return bump(x, 1.0 + float(A(b, 1.0)))

    base = CauchyData1D(f=f)
    full = CauchyData1D(u0=g, u1=g, f=f)
    for x in [-2.0, -0.5, 0.0, 1.1, 2.4]:
        lo = solve_exact(1.0, x, base, params)
        hi = solve_exact(1.0, x, full, params)
        assert lo >= -1e-10
        assert hi >= lo - 1e-10


def test_linearity():
    params = KernelParams(2.0)
    h = make_profile("bump4", 1.0)
    a, b = 0.7, -1.3
    combo = CauchyData1D(u0=lambda x: a * g(x) + b * h(x))
    for x in [0.0, 0.9, 2.5]:
        lhs = solve_exact(0.8, x, combo, params)
        rhs = a * solve_exact(0.8, x, CauchyData1D(u0=g), params) + b * solve_exact(
            0.8, x, CauchyData1D(u0=h), params
        )
        assert lhs == pytest.approx(rhs, abs=1e-9)


@pytest.mark.parametrize("ell", [0.0, 1.0, 2.0])
def test_finite_speed_exact(ell):
    params = KernelParams(ell)
    data = CauchyData1D(u0=g, u1=g)
    t = 1.0
    edge = 1.0 + float(A(t, ell))
    for x in [edge + 1e-6, edge + 0.3, -edge - 0.01]:
        assert abs(solve_exact(t, x, data, params)) <= 1e-10


def test_domain_of_dependence():
    assert domain_of_dependence(2.0, 0.0, KernelParams(0)).base == (-2.0, 2.0)
    dom = domain_of_dependence(1.0, 0.0, KernelParams(1))
    assert dom.base == pytest.approx((-1.5, 1.5))
    assert dom.contains(0.0, 1.4) and not dom.contains(0.0, 1.6)
    assert dom.half_width(1.0) == 0.0
    with pytest.raises(DomainError):
        domain_of_dependence(0.0, 0.0, KernelParams(1))


def test_perturbation_outside_dependence_domain():
    params = KernelParams(1.0)
    t0 = 0.5
    a = float(A(t0, 1.0))
    # data supported in [-1, 1]; evaluate far enough right that only part of it is seen
    x0 = 1.0 + a - 0.4
    base = CauchyData1D(u0=g, u1=g, R=4.0)
    bumped = CauchyData1D(u0=lambda x: g(x) + bump(x + 3.0, 0.5), u1=g, R=4.0)
    assert x0 - a > -2.5  # the perturbation lives left of the base interval
    assert solve_exact(t0, x0, bumped, params) == pytest.approx(solve_exact(t0, x0, base, params), abs=1e-10)


def test_fd_zero_data_is_zero():
    grid = solve_fd(CauchyData1D(), KernelParams(1.0), 1.0, 0.05)
    assert np.all(grid.values == 0.0)


def test_fd_validation():
    data = CauchyData1D(u0=g)
    with pytest.raises(InvalidParam):
        solve_fd(data, KernelParams(0), 1.0, 0.0)
    with pytest.raises(InvalidParam):
        solve_fd(data, KernelParams(0), 1.0, 0.1, cfl=1.2)


def test_fd_grid_covers_cone():
    grid = solve_fd(CauchyData1D(u0=g), KernelParams(1.0), 1.0, 0.05)
    assert grid.x[-1] >= grid_half_width(1.0, 1.0, 1.0, 0.05) - 1e-12
    assert grid.times[-1] == pytest.approx(1.0, abs=1e-14)
    assert np.all(np.diff(grid.times) > 0)


def test_fd_translating_pulse():
    # u0 = g, u1 = -g' travels right unchanged when l = 0
    def dg(x):
        s = np.asarray(x, dtype=float)
        w = np.clip(1 - s * s, 0, None)
        return np.where(np.abs(s) < 1, -16 * s * w**7, 0.0)

    data = CauchyData1D(u0=g, u1=lambda x: -dg(x))
    errs = []
    for dx in (0.02, 0.01):
        grid = solve_fd(data, KernelParams(0), 1.0, dx)
        errs.append(np.max(np.abs(grid.final - g(grid.x - 1.0))))
    assert errs[1] < 1e-3
    assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.25)


def test_bump_second_derivative():
    x = np.linspace(-0.9, 0.9, 7)
    h = 1e-4
    fd = (g(x + h) - 2 * g(x) + g(x - h)) / h**2
    assert np.allclose(bump_d2(x), fd, rtol=1e-5, atol=1e-5)


def test_fd_matches_exact_at_origin():
    params = KernelParams(1.0)
    data = CauchyData1D(u0=g)
    exact = solve_exact(1.0, 0.0, data, params)
    grid = solve_fd(data, params, 1.0, 0.005)
    assert grid.at(0.0) == pytest.approx(exact, rel=1e-3)


@pytest.mark.parametrize("ell", [0.0, 1.0, 2.0])
def test_convergence_order(ell):
    rows = convergence_study(CauchyData1D(u0=g), KernelParams(ell), 1.0, levels=3, dx0=0.02)
    assert [r.dx for r in rows] == pytest.approx([0.02, 0.01, 0.005])
    assert rows[0].error > rows[1].error > rows[2].error
    for r in rows[1:]:
        assert 1.8 <= r.order <= 2.2
    assert rows[-1].error <= 1e-3
    with pytest.raises(InvalidParam):
        convergence_study(CauchyData1D(u0=g), KernelParams(ell), 1.0, levels=1)

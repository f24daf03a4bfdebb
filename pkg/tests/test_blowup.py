import math

import numpy as np
import pytest
from scipy import integrate as sci

from wavelab.blowup import (
    FunctionalTrace,
    RadialGrid,
    SimConfig,
    check_G1_bound,
    check_G_identity,
    config_from_text,
    config_to_text,
    kato_fit,
    lifespan_scan,
    lifespan_to_csv,
    load_config,
    predicted_front,
    radon_radial,
    simulate,
)
from wavelab.blowup import test_function_psi as psi
from wavelab.errors import DomainError, GridTooSmall, InvalidParam, WindowTooShort
from wavelab.exponents import KatoCase
from wavelab.profiles import bump


@pytest.fixture(scope="module")
def blowup_run():
    return simulate(SimConfig(dx=0.02))


def test_config_validation():
    for bad in (
        dict(n=4),
        dict(k=-2),
        dict(p=1),
        dict(epsilon=0),
        dict(u0="zero"),
        dict(u1="nope"),
        dict(n=3, cfl=0.8),
        dict(dx=-1),
        dict(record_every=0),
    ):
        with pytest.raises(InvalidParam):
            SimConfig(**bad)


def test_config_text_roundtrip(tmp_path):
    cfg = SimConfig(n=2, ell=0.5, k=1.0, p=3.0, epsilon=0.25, L=12.0)
    assert config_from_text(config_to_text(cfg)) == cfg
    path = tmp_path / "sim.cfg"
    path.write_text("# comment\nn = 3\n\np=2.5  # trailing\ncfl=0.5\n")
    loaded = load_config(path)
    assert (loaded.n, loaded.p, loaded.L) == (3, 2.5, None)
    with pytest.raises(InvalidParam):
        config_from_text("bogus=1\n")
    with pytest.raises(InvalidParam):
        config_from_text("p=two\n")
    with pytest.raises(InvalidParam):
        config_from_text("p\n")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_radial_grid(n):
    grid = RadialGrid(n, 0.01, 2.0)
    u = bump(grid.r, 1.5)
    # flux form: the discrete integral of the Laplacian vanishes exactly
    assert abs(grid.integral(grid.laplacian(u))) <= 1e-12
    # Lap r^2 = 2n away from the outer edge
    lap = grid.laplacian(grid.r**2)
    assert np.allclose(lap[1:-1], 2 * n, rtol=1e-10)
    ball = grid.integral(bump(grid.r))
    ref, _ = sci.quad(lambda r: bump(r) * r ** (n - 1), 0, 1)
    omega = {1: 2.0, 2: 2 * math.pi, 3: 4 * math.pi}[n]
    assert ball == pytest.approx(omega * ref, rel=1e-3)


def test_blowup_example(blowup_run):
    out = blowup_run.outcome
    assert out.blew_up
    assert 0 < out.T_est < 50
    assert out.T_est == pytest.approx(7.9, abs=0.1)
    tr = blowup_run.trace
    assert np.all(np.diff(tr.t) > 0)
    assert np.all(tr.G > 0)
    assert np.all(tr.G >= tr.G[0] - 1e-12)


def test_small_amplitude_lives_longer(blowup_run):
    small = simulate(SimConfig(dx=0.02, epsilon=0.25))
    assert small.outcome.T_est > blowup_run.outcome.T_est


def test_trace_csv(blowup_run, tmp_path):
    path = tmp_path / "trace.csv"
    blowup_run.trace.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,G,dG,G1,Lp_mass,sup_norm"
    assert len(lines) == len(blowup_run.trace) + 1
    assert float(lines[1].split(",")[1]) == blowup_run.trace.G[0]


def test_G_identity_improves_under_refinement(blowup_run):
    T = blowup_run.outcome.T_est
    window = (0.0, 0.8 * T)
    coarse = check_G_identity(blowup_run.trace, SimConfig(), t_window=window)
    fine = check_G_identity(simulate(SimConfig(dx=0.01)).trace, SimConfig(), t_window=window)
    assert coarse / fine >= 3


def test_G_identity_two_dimensions():
    res = []
    for dx in (0.02, 0.01):
        cfg = SimConfig(n=2, dx=dx, T_max=3.0, p=2.0)
        res.append(check_G_identity(simulate(cfg).trace, cfg))
    assert res[1] < res[0]
    assert res[0] / res[1] >= 3


def test_G_identity_linear_run():
    cfg = SimConfig(source_scale=0.0, u1="bump", T_max=4.0, dx=0.02)
    assert check_G_identity(simulate(cfg).trace, cfg) <= 1e-8


def test_G_identity_short_trace():
    cfg = SimConfig()
    tr = FunctionalTrace(*(np.arange(3.0) for _ in range(6)))
    with pytest.raises(WindowTooShort):
        check_G_identity(tr, cfg)


def test_support_tracking():
    cfg = SimConfig(dx=0.005, T_max=6.0)
    tr = simulate(cfg).trace
    assert np.all(tr.front <= predicted_front(tr.t, cfg) + 2 * cfg.dx)


def test_support_tracking_linear():
    # the leapfrog precursor ahead of the front stays below 1e-8 only on fine grids
    cfg = SimConfig(source_scale=0.0, u1="bump", T_max=4.0, ell=1.0, dx=0.005)
    tr = simulate(cfg).trace
    assert np.all(tr.front <= predicted_front(tr.t, cfg) + 2 * cfg.dx)


def test_grid_too_small():
    with pytest.raises(GridTooSmall):
        simulate(SimConfig(source_scale=0.0, T_max=5.0, L=3.0, dx=0.02))


def test_G1_bounds():
    cfg = SimConfig(source_scale=0.0, T_max=5.0, dx=0.02)
    rep = check_G1_bound(simulate(cfg).trace, cfg)
    assert rep.positive and not rep.degenerate
    cfg = SimConfig(source_scale=0.0, ell=1.0, T_max=3.0, dx=0.02)
    rep = check_G1_bound(simulate(cfg).trace, cfg)
    assert rep.positive and rep.min_scaled > 0
    zero = FunctionalTrace(*(np.zeros(5) for _ in range(6)))
    rep = check_G1_bound(zero, cfg)
    assert rep.degenerate and rep.trend == "degenerate"


def test_kato_fit_linear_growth():
    cfg = SimConfig(source_scale=0.0, u1="bump", T_max=20.0, dx=0.02)
    fit = kato_fit(simulate(cfg).trace, cfg)
    assert fit.a == pytest.approx(1.0, abs=1e-3)
    assert fit.threshold == -1.0
    assert fit.verdict is KatoCase.CASE_I


def test_kato_fit_critical_structure():
    # n = 2, p = 3: q = 4 = p + 1 and the threshold (q-2)/(p-1) is 1
    cfg = SimConfig(n=2, p=3.0, source_scale=0.0, u1="bump", T_max=10.0, dx=0.02)
    fit = kato_fit(simulate(cfg).trace, cfg)
    assert fit.q == 4.0 and fit.threshold == 1.0
    assert fit.verdict is KatoCase.CASE_II


def test_kato_fit_window_too_short():
    cfg = SimConfig()
    tr = FunctionalTrace(*(np.linspace(1, 2, 6) for _ in range(6)))
    with pytest.raises(WindowTooShort):
        kato_fit(tr, cfg)


def test_lifespan_monotone(tmp_path):
    cfg = SimConfig(dx=0.02, T_max=25.0)
    rows = lifespan_scan(cfg, [0.25, 0.5, 1.0, 2.0])
    T = [r.T_est for r in rows]
    assert all(a >= b for a, b in zip(T, T[1:]))
    assert not any(r.censored for r in rows)
    path = tmp_path / "life.csv"
    lifespan_to_csv(rows, path)
    assert path.read_text().splitlines()[0] == "epsilon,T_est,censored"
    with pytest.raises(InvalidParam):
        lifespan_scan(cfg, [0.0])


def test_lifespan_censored():
    cfg = SimConfig(dx=0.02, T_max=2.0)
    (row,) = lifespan_scan(cfg, [0.01])
    assert row.censored and row.T_est == pytest.approx(2.0)


def test_psi_solves_linear_equation():
    cfg = SimConfig(n=3, ell=1.0, cfl=0.5)
    t, r, h = 1.0, 0.5, 1e-3
    c = np.array([-1, 16, -30, 16, -1]) / (12 * h * h)
    d1 = np.array([1, -8, 0, 8, -1]) / (12 * h)
    k = np.arange(-2, 3) * h
    tt = float(np.dot(c, [psi(t + s, r, cfg) for s in k]))
    rs = np.array([psi(t, r + s, cfg) for s in k])
    lap = float(np.dot(c, rs) + 2 / r * np.dot(d1, rs))
    rhs = (1 + t) ** 2 * lap
    assert abs(tt - rhs) <= 1e-5 * abs(rhs)
    assert psi(0.0, 0.0, cfg) == pytest.approx(4 * math.pi)


def test_radon_support_and_symmetry():
    u = lambda r: bump(r)
    assert radon_radial(u, 1.0, 3, 1.0) == 0.0
    assert radon_radial(u, -1.5, 2, 1.0) == 0.0
    assert radon_radial(u, 0.3, 3, 1.0) == radon_radial(u, -0.3, 3, 1.0)
    with pytest.raises(DomainError):
        radon_radial(u, 0.0, 1, 1.0)


@pytest.mark.parametrize("rho", [0.0, 0.4, 0.9])
def test_radon_unit_ball(rho):
    one = lambda r: np.where(r <= 1.0, 1.0, 0.0)
    # plane sections of the unit ball: disc area and chord length
    assert radon_radial(one, rho, 3, 1.0) == pytest.approx(math.pi * (1 - rho**2), rel=1e-10)
    assert radon_radial(one, rho, 2, 1.0) == pytest.approx(2 * math.sqrt(1 - rho**2), rel=1e-10)


def test_radon_grid_input():
    r = np.linspace(0, 1, 2001)
    vals = bump(r)
    a = radon_radial((r, vals), 0.2, 3, 1.0)
    b = radon_radial(bump, 0.2, 3, 1.0)
    assert a == pytest.approx(b, rel=1e-5)

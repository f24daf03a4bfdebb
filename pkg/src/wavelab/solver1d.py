"""Linear 1D problem u_tt - (1+t)^(2l) u_xx = f with data (u0, u1).

``solve_exact`` evaluates the kernel representation of the solution at a
point. ``solve_fd`` is an explicit leapfrog reference used to cross-check
it, and ``convergence_study`` ties the two together.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InvalidParam, StabilityFailure
from .kernels import A, A_inv, E, K0, K1, KernelParams, cone_width
from .quadrature import integrate


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-10
    max_depth: int = 30

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise InvalidParam("abs_tol must be positive")
        if self.max_depth < 1:
            raise InvalidParam("max_depth must be >= 1")


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass
class CauchyData1D:
    """Initial data and source, all supported in |x| <= R at t = 0.

    u0(x), u1(x) take arrays. f(t, x) takes a scalar t and an array x and
    may be None for the homogeneous problem; f(t, .) must vanish outside
    |x| <= R + A(t).
    """

    u0: Callable = _zero
    u1: Callable = _zero
    R: float = 1.0
    f: Optional[Callable] = None

    def __post_init__(self):
        if not self.R > 0:
            raise InvalidParam("support radius R must be positive")


def _data_window(x, R, reach):
    """y-range in [0, reach] where g(x - y) + g(x + y) can be nonzero for supp g in [-R, R]."""
    ax = abs(x)
    lo, hi = max(0.0, ax - R), min(reach, ax + R)
    return lo, hi, [abs(R - ax)]


def _data_term(g, kernel, t, x, R, reach, q):
    lo, hi, pts = _data_window(x, R, reach)
    if hi <= lo:
        return 0.0

    def integrand(y):
        return (g(x - y) + g(x + y)) * kernel(t, y)

    return integrate(integrand, lo, hi, abs_tol=q.abs_tol, max_depth=q.max_depth, points=pts)


def _source_term(f, t, x, R, params, q):
    ell = params.ell
    ax = abs(x)
    at = float(A(t, ell))

    def inner(b):
        w = cone_width(t, b, ell)
        rb = R + float(A(b, ell))
        lo, hi = max(0.0, ax - rb), min(w, ax + rb)
        if hi <= lo:
            return 0.0

        def integrand(y):
            return (f(b, x - y) + f(b, x + y)) * E(t, y, b, params)

        return integrate(
            integrand, lo, hi, abs_tol=q.abs_tol / max(t, 1.0), max_depth=q.max_depth, points=[abs(rb - ax)]
        )

    # source times where the inner window changes shape
    kinks = []
    for a_b in (ax - R, (at - ax - R) / 2.0, (at + ax - R) / 2.0):
        if 0.0 < a_b < at:
            kinks.append(float(A_inv(a_b, ell)))
    outer = integrate(
        lambda bs: np.array([inner(b) for b in bs]),
        0.0,
        t,
        abs_tol=q.abs_tol,
        max_depth=q.max_depth,
        points=kinks,
    )
    return params.c_ell * outer


def solve_exact(t, x, data, params, q=QuadConfig()):
    """u(t, x) from the kernel representation; each integral to ``q.abs_tol``."""
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0:
        return float(data.u0(np.array([x], dtype=float))[0])
    ell = params.ell
    a = float(A(t, ell))
    R = data.R
    pts = np.array([x + a, x - a], dtype=float)
    val = 0.5 * (1.0 + t) ** (-ell / 2) * float(np.sum(data.u0(pts)))
    if ell > 0:
        val += _data_term(data.u0, lambda s, y: K0(s, y, params), t, x, R, a, q)
    val += _data_term(data.u1, lambda s, y: K1(s, y, params), t, x, R, a, q)
    if data.f is not None:
        val += _source_term(data.f, t, x, R, params, q)
    return val


@dataclass(frozen=True)
class DependenceDomain:
    t0: float
    x0: float
    ell: float

    @property
    def base(self):
        a = float(A(self.t0, self.ell))
        return (self.x0 - a, self.x0 + a)

    def half_width(self, t):
        """phi(1+t0) - phi(1+t): radius of the backward cone at time t."""
        return float(A(self.t0, self.ell) - A(t, self.ell))

    def contains(self, t, x):
        return 0 <= t < self.t0 and abs(x - self.x0) < self.half_width(t)


def domain_of_dependence(t0, x0, params):
    if not t0 > 0:
        raise DomainError("t0 must be positive")
    return DependenceDomain(t0, x0, params.ell)


@dataclass
class FDGrid:
    ell: float
    dx: float
    cfl: float
    T: float
    x: np.ndarray
    times: np.ndarray
    values: np.ndarray  # shape (len(times), len(x))

    @property
    def final(self):
        return self.values[-1]

    def at(self, x, step=-1):
        return np.interp(x, self.x, self.values[step])


def grid_half_width(R, ell, T, dx):
    return R + float(A(T, ell)) + 2.0 * dx


def _laplacian(u, dx):
    out = np.zeros_like(u)
    out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dx * dx)
    return out


def solve_fd(data, params, T, dx, cfl=0.5, record_every=1, guard=1e8):
    """Leapfrog for u_tt = (1+t)^(2l) u_xx + f with dt_n = cfl dx / (1+t_n)^l.

    The grid is x = j dx on [-L, L] with L >= R + A(T) + 2dx, homogeneous
    Dirichlet ends. Steps are non-uniform, so the update uses the
    three-point second difference for unequal spacing. The last step is
    shortened to land on T.
    """
    if not dx > 0:
        raise InvalidParam("dx must be positive")
    if not 0 < cfl < 1:
        raise InvalidParam("cfl must be in (0, 1)")
    if T < 0:
        raise InvalidParam("T must be >= 0")
    ell = params.ell
    half = math.ceil(grid_half_width(data.R, ell, T, dx) / dx) + 1
    x = dx * np.arange(-half, half + 1)
    f = data.f if data.f is not None else (lambda t, s: 0.0 * s)

    u_prev = np.asarray(data.u0(x), dtype=float)
    scale = max(1.0, float(np.max(np.abs(u_prev))), float(np.max(np.abs(data.u1(x)))))
    times, frames = [0.0], [u_prev.copy()]
    if T == 0:
        return FDGrid(ell, dx, cfl, T, x, np.array(times), np.array(frames))

    dt_prev = min(cfl * dx, T)
    acc0 = _laplacian(u_prev, dx) + f(0.0, x)
    u = u_prev + dt_prev * np.asarray(data.u1(x), dtype=float) + 0.5 * dt_prev**2 * acc0
    u[0] = u[-1] = 0.0
    t, step = dt_prev, 1
    if record_every == 1 or t >= T:
        times.append(t)
        frames.append(u.copy())
    while t < T * (1 - 1e-14):
        dt = min(cfl * dx / (1.0 + t) ** ell, T - t)
        acc = (1.0 + t) ** (2 * ell) * _laplacian(u, dx) + f(t, x)
        u_next = u + (dt / dt_prev) * (u - u_prev) + 0.5 * dt * (dt + dt_prev) * acc
        u_next[0] = u_next[-1] = 0.0
        u_prev, u, dt_prev = u, u_next, dt
        t += dt
        step += 1
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > guard * scale:
            raise StabilityFailure(f"linear FD run left the overflow guard at t={t:.6g}")
        if step % record_every == 0 or t >= T * (1 - 1e-14):
            times.append(t)
            frames.append(u.copy())
    times[-1] = T
    return FDGrid(ell, dx, cfl, T, x, np.array(times), np.array(frames))


@dataclass
class ConvergenceRow:
    dx: float
    error: float
    order: Optional[float]


def default_probes(data, params, T, dx, count=41):
    """Nodes of the coarsest grid spread over the region the solution can reach."""
    reach = data.R + float(A(T, params.ell))
    idx = np.unique(np.round(np.linspace(-reach, reach, count) / dx).astype(int))
    return idx * dx


def convergence_study(data, params, T, levels=3, dx0=0.02, cfl=0.5, probes=None, q=QuadConfig()):
    """Max-norm error of solve_fd against solve_exact at probe points for dx0, dx0/2, ..."""
    if levels < 2:
        raise InvalidParam("levels must be >= 2")
    if probes is None:
        probes = default_probes(data, params, T, dx0)
    exact = np.array([solve_exact(T, p, data, params, q) for p in probes])
    rows = []
    for i in range(levels):
        dx = dx0 / 2**i
        grid = solve_fd(data, params, T, dx, cfl, record_every=10**9)
        err = float(np.max(np.abs(grid.at(probes) - exact)))
        order = None
        if rows and err > 0 and rows[-1].error > 0:
            order = math.log2(rows[-1].error / err)
        rows.append(ConvergenceRow(dx, err, order))
    return rows

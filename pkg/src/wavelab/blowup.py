"""Finite-difference simulation of u_tt - (1+t)^(2l) Lap u = (l+1)^2 (1+t)^k |u|^p
for radial data in n = 1, 2, 3, with the functionals used in the blow-up
argument tracked along the run.

All dimensions share one radial grid r_j = j dr, j = 0..N. For n = 1 this
is the even reduction of a problem on the line. The Laplacian is written in
flux form over cells [r_{j-1/2}, r_{j+1/2}], so the cell-volume sum of
Lap u vanishes exactly and the discrete G'' picks up only the source.
"""

import csv
import math
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from .errors import DomainError, GridTooSmall, InvalidParam, WindowTooShort
from .exponents import KatoCase, kato_check
from .kernels import A
from .profiles import PROFILES, make_profile
from .quadrature import integrate
from .specfun import DEFAULT_TOL, lambda_fn, lambda_log, sphere_exp_integral, sphere_measure

SUPPORT_RTOL = 1e-8
# leapfrog stability limit of cfl per dimension: 2 / sqrt(spectral radius of
# dr^2 Lap), which the origin row pushes below 1 for n >= 2
CFL_LIMIT = {1: 1.0, 2: 0.9, 3: 0.79}
STIFF_FACTOR = 0.1
DT_FLOOR = 1e-14


@dataclass
class SimConfig:
    n: int = 1
    ell: float = 0.0
    k: float = 0.0
    p: float = 2.0
    epsilon: float = 1.0
    u0: str = "bump"
    u1: str = "zero"
    R: float = 1.0
    dx: float = 0.01
    cfl: float = 0.5
    blowup_threshold: float = 1e8
    T_max: float = 50.0
    L: Optional[float] = None
    record_every: int = 1
    source_scale: float = 1.0

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise InvalidParam(f"n must be 1, 2 or 3, got {self.n}")
        if not self.ell >= 0:
            raise InvalidParam("ell must be >= 0")
        if not self.k > -2:
            raise InvalidParam("k must be > -2")
        if not self.p > 1:
            raise InvalidParam("p must be > 1")
        if not self.epsilon > 0:
            raise InvalidParam("epsilon must be positive")
        for name in (self.u0, self.u1):
            if name not in PROFILES:
                raise InvalidParam(f"unknown profile {name!r}; choose from {sorted(PROFILES)}")
        if self.u0 == "zero":
            raise InvalidParam("u0 must not vanish identically")
        if not (self.R > 0 and self.dx > 0 and self.T_max > 0):
            raise InvalidParam("R, dx and T_max must be positive")
        if not 0 < self.cfl < CFL_LIMIT[self.n]:
            raise InvalidParam(f"cfl must be in (0, {CFL_LIMIT[self.n]}) for n={self.n}")
        if not self.blowup_threshold > 0:
            raise InvalidParam("blowup_threshold must be positive")
        if self.record_every < 1:
            raise InvalidParam("record_every must be >= 1")
        if self.source_scale < 0:
            raise InvalidParam("source_scale must be >= 0")

    @property
    def linear(self):
        return self.source_scale == 0

    @property
    def grid_radius(self):
        if self.L is not None:
            return self.L
        reach = float(A(self.T_max, self.ell))
        # room for the small dispersive precursor the scheme sends ahead of the front
        return self.R + reach + 20.0 * self.dx + 0.05 * reach

    def replace(self, **changes):
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return SimConfig(**values)


def _convert(name, text):
    kind = {f.name: f.type for f in fields(SimConfig)}[name]
    if kind in (int, "int"):
        return int(text)
    if kind in (str, "str"):
        return text
    if text.lower() in ("none", ""):
        return None
    return float(text)


def parse_key_values(text):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParam(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def config_from_text(text):
    known = {f.name for f in fields(SimConfig)}
    values = {}
    for key, value in parse_key_values(text).items():
        if key not in known:
            raise InvalidParam(f"unknown config key {key!r}")
        try:
            values[key] = _convert(key, value)
        except ValueError as exc:
            raise InvalidParam(f"bad value for {key}: {value!r}") from exc
    return SimConfig(**values)


def load_config(path):
    with open(path) as fh:
        return config_from_text(fh.read())


def config_to_text(cfg):
    return "".join(f"{f.name}={getattr(cfg, f.name)}\n" for f in fields(SimConfig))


class RadialGrid:
    """Cell-centred radial grid with volume weights w_j = |cell j| in R^n."""

    def __init__(self, n, dr, radius):
        self.n, self.dr = n, dr
        self.N = int(math.ceil(radius / dr)) + 1
        self.r = dr * np.arange(self.N + 1)
        omega = sphere_measure(n)
        edges = np.concatenate(([0.0], self.r[:-1] + 0.5 * dr, [self.r[-1]]))
        self.weights = omega * (edges[1:] ** n - edges[:-1] ** n) / n
        # face areas at r_{j+1/2}
        self._flux = omega * (self.r[:-1] + 0.5 * dr) ** (n - 1)

    def laplacian(self, u):
        flux = self._flux * np.diff(u) / self.dr
        div = np.zeros_like(u)
        div[:-1] += flux
        div[1:] -= flux
        out = div / self.weights
        out[-1] = 0.0
        return out

    def integral(self, values):
        return float(np.dot(self.weights, values))


@dataclass
class FunctionalTrace:
    t: np.ndarray
    G: np.ndarray
    dG: np.ndarray
    G1: np.ndarray
    Lp_mass: np.ndarray
    sup_norm: np.ndarray
    front: np.ndarray = field(default=None, repr=False)

    COLUMNS = ("t", "G", "dG", "G1", "Lp_mass", "sup_norm")

    def __len__(self):
        return len(self.t)

    def rows(self):
        return zip(*(getattr(self, c) for c in self.COLUMNS))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.COLUMNS)
            for row in self.rows():
                w.writerow([format(float(v), ".17g") for v in row])


@dataclass
class Outcome:
    kind: str  # "BlewUpAt" or "ReachedHorizon"
    T_est: Optional[float]
    t_reached: float

    @property
    def blew_up(self):
        return self.kind == "BlewUpAt"


@dataclass
class SimResult:
    trace: FunctionalTrace
    outcome: Outcome
    r: np.ndarray
    u: np.ndarray  # last stable profile
    steps: int


def _source_coeff(cfg, t):
    return cfg.source_scale * (cfg.ell + 1.0) ** 2 * (1.0 + t) ** cfg.k


def simulate(cfg):
    """Run the leapfrog scheme until blow-up or T_max.

    Blow-up is declared when the sup norm passes ``blowup_threshold``,
    doubles within one step, turns non-finite, or the step size collapses.
    T_est is the midpoint of the last stable and the first unstable step.
    """
    grid = RadialGrid(cfg.n, cfg.dx, cfg.grid_radius)
    r, ell, p = grid.r, cfg.ell, cfg.p
    u_prev = make_profile(cfg.u0, cfg.R, cfg.epsilon)(r)
    v0 = make_profile(cfg.u1, cfg.R, cfg.epsilon)(r)
    phi_scaled = sphere_exp_integral(r, cfg.n, scaled=True)
    weighted_phi = grid.weights * phi_scaled

    def log_lambda(t):
        return lambda_log(t, ell)

    rec = {c: [] for c in ("t", "G", "G1", "Lp", "sup", "front")}

    def front_of(u, sup):
        thr = SUPPORT_RTOL * max(1.0, sup)
        idx = np.nonzero(np.abs(u) > thr)[0]
        return r[idx[-1]] if idx.size else 0.0

    def record(t, u):
        au = np.abs(u)
        sup = float(au.max())
        # psi = lambda(t) phi(r); combine exponents before exponentiating
        g1 = float(np.dot(weighted_phi * np.exp(r + log_lambda(t)), u))
        rec["t"].append(t)
        rec["G"].append(grid.integral(u))
        rec["G1"].append(g1)
        rec["Lp"].append(grid.integral(au**p))
        rec["sup"].append(sup)
        rec["front"].append(front_of(u, sup))

    def check_grid(u):
        sup = float(np.max(np.abs(u)))
        if front_of(u, sup) >= r[-3]:
            raise GridTooSmall(
                f"solution reached the grid edge r={r[-1]:.6g}; enlarge L or lower T_max"
            )

    def step_size(t, sup):
        dt = cfg.cfl * cfg.dx / (1.0 + t) ** ell
        rate = _source_coeff(cfg, t) * p * sup ** (p - 1.0)
        if rate > 0:
            dt = min(dt, STIFF_FACTOR / math.sqrt(rate))
        return min(dt, cfg.T_max - t)

    record(0.0, u_prev)
    sup0 = float(np.max(np.abs(u_prev)))
    dt_prev = step_size(0.0, sup0)
    acc = grid.laplacian(u_prev) + _source_coeff(cfg, 0.0) * np.abs(u_prev) ** p
    u = u_prev + dt_prev * v0 + 0.5 * dt_prev**2 * acc
    u[-1] = 0.0
    t, steps = dt_prev, 1
    last_sup = sup0
    end = cfg.T_max * (1 - 1e-14)

    while True:
        sup = float(np.max(np.abs(u)))
        doubled = cfg.source_scale > 0 and last_sup > 0 and sup > 2.0 * last_sup
        if not np.isfinite(sup) or sup > cfg.blowup_threshold or doubled:
            outcome = Outcome("BlewUpAt", t - 0.5 * dt_prev, t - dt_prev)
            stable_u = u_prev
            break
        if steps % cfg.record_every == 0 or t >= end:
            record(t, u)
            check_grid(u)
        if t >= end:
            outcome = Outcome("ReachedHorizon", None, t)
            stable_u = u
            break
        dt = step_size(t, sup)
        if dt < DT_FLOOR * (1.0 + t):
            outcome = Outcome("BlewUpAt", t + 0.5 * dt, t)
            stable_u = u
            break
        acc = (1.0 + t) ** (2 * ell) * grid.laplacian(u) + _source_coeff(cfg, t) * np.abs(u) ** p
        u_next = u + (dt / dt_prev) * (u - u_prev) + 0.5 * dt * (dt + dt_prev) * acc
        u_next[-1] = 0.0
        u_prev, u, dt_prev, last_sup = u, u_next, dt, sup
        t += dt
        steps += 1

    ts = np.array(rec["t"])
    G = np.array(rec["G"])
    dG = np.gradient(G, ts) if len(ts) > 1 else np.zeros_like(G)
    dG[0] = grid.integral(v0)
    trace = FunctionalTrace(
        t=ts,
        G=G,
        dG=dG,
        G1=np.array(rec["G1"]),
        Lp_mass=np.array(rec["Lp"]),
        sup_norm=np.array(rec["sup"]),
        front=np.array(rec["front"]),
    )
    return SimResult(trace, outcome, r, stable_u, steps)


def predicted_front(t, cfg):
    return cfg.R + A(t, cfg.ell)


def check_G_identity(trace, cfg, stride=4, t_window=None):
    """Max residual of G'' = (l+1)^2 (1+t)^k int |u|^p over interior samples.

    G'' is the three-point second difference over samples ``stride`` apart,
    so its error is the genuine O(H^2) one for spacing H. The residual is
    relative to max |rhs| over the window, or absolute when rhs vanishes.
    """
    t, G = trace.t, trace.G
    if len(t) < 2 * stride + 1:
        raise WindowTooShort(f"need at least {2 * stride + 1} samples, got {len(t)}")
    i = np.arange(stride, len(t) - stride)
    if t_window is not None:
        lo, hi = t_window
        i = i[(t[i] >= lo) & (t[i] <= hi)]
        if i.size == 0:
            raise WindowTooShort("no samples inside the requested window")
    h1 = t[i] - t[i - stride]
    h2 = t[i + stride] - t[i]
    lhs = 2.0 * ((G[i + stride] - G[i]) / h2 - (G[i] - G[i - stride]) / h1) / (h1 + h2)
    rhs = np.array([_source_coeff(cfg, s) for s in t[i]]) * trace.Lp_mass[i]
    scale = float(np.max(np.abs(rhs)))
    err = float(np.max(np.abs(lhs - rhs)))
    return err / scale if scale > 0 else err


@dataclass
class G1BoundReport:
    min_scaled: float
    positive: bool
    trend: str  # "nondecreasing", "decreasing" or "degenerate"
    degenerate: bool


def check_G1_bound(trace, cfg):
    """min of G1 (1+t)^l over the trailing half of the trace, plus its trend."""
    g1 = trace.G1
    if not np.any(g1):
        return G1BoundReport(0.0, False, "degenerate", True)
    half = len(g1) // 2
    t = trace.t[half:]
    scaled = g1[half:] * (1.0 + t) ** cfg.ell
    m = float(np.min(scaled))
    trend = "nondecreasing" if scaled[-1] >= scaled[0] else "decreasing"
    return G1BoundReport(m, m > 0, trend, False)


@dataclass
class KatoFit:
    a: float
    q: float
    threshold: float
    lower_bound_exponent: float
    verdict: KatoCase
    window: tuple


def kato_fit(trace, cfg, window_frac=0.5, min_points=10, a_tol=0.05):
    """Slope of log G against log(R + t) over the trailing window, set against Kato's lemma.

    q = (l+1) n (p-1) - k is the decay exponent of the weight in the
    differential inequality for G; the growth exponent expected from the
    test-function argument is
    max{k - l p/2 - (n-1)(p/2 - 1)(l+1) + 2, 1}.
    """
    n, ell, k, p = cfg.n, cfg.ell, cfg.k, cfg.p
    start = int(len(trace.t) * (1.0 - window_frac))
    t = trace.t[start:]
    G = trace.G[start:]
    good = G > 0
    t, G = t[good], G[good]
    if len(t) < min_points:
        raise WindowTooShort(f"fit window has {len(t)} samples, need {min_points}")
    x = np.log(cfg.R + t)
    if np.ptp(x) == 0:
        raise WindowTooShort("fit window spans a single time")
    a = float(np.polyfit(x, np.log(G), 1)[0])
    q = (ell + 1.0) * n * (p - 1.0) - k
    threshold = (q - 2.0) / (p - 1.0)
    lower = max(k - ell * p / 2.0 - (n - 1.0) * (p / 2.0 - 1.0) * (ell + 1.0) + 2.0, 1.0)
    verdict = kato_check(p, q, a, a_tol=a_tol)
    return KatoFit(a, q, threshold, lower, verdict, (float(t[0]), float(t[-1])))


@dataclass
class LifespanRow:
    epsilon: float
    T_est: float
    censored: bool


def lifespan_scan(cfg, epsilons):
    """T_est per amplitude; runs that reach T_max are censored at T_max."""
    rows = []
    for eps in epsilons:
        if not eps > 0:
            raise InvalidParam("every epsilon must be positive")
        out = simulate(cfg.replace(epsilon=float(eps))).outcome
        if out.blew_up:
            rows.append(LifespanRow(float(eps), out.T_est, False))
        else:
            rows.append(LifespanRow(float(eps), out.t_reached, True))
    return rows


def lifespan_to_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("epsilon", "T_est", "censored"))
        for row in rows:
            w.writerow((format(row.epsilon, ".17g"), format(row.T_est, ".17g"), int(row.censored)))


def test_function_psi(t, r, cfg, tol=DEFAULT_TOL):
    """psi(t, x) = lambda(t) phi(|x|), a positive solution of psi_tt = (1+t)^(2l) Lap psi."""
    return lambda_fn(t, cfg.ell, tol) * sphere_exp_integral(np.abs(r), cfg.n, tol)


test_function_psi.__test__ = False  # keep pytest from collecting it


def radon_radial(u, rho, n, R_support, tol=DEFAULT_TOL):
    """|S^(n-2)| int_{|rho|}^{R} u(r) (r^2 - rho^2)^((n-3)/2) r dr for radial u.

    With r = sqrt(rho^2 + s^2) the integrand becomes u(r(s)) s^(n-2) ds on
    [0, sqrt(R^2 - rho^2)], which is smooth for n = 2 as well.
    ``u`` is a vectorized callable of r or a pair (r_grid, values).
    """
    if n < 2 or int(n) != n:
        raise DomainError("the radial Radon formula needs integer n >= 2")
    if isinstance(u, tuple):
        grid, values = (np.asarray(a, dtype=float) for a in u)
        fn = lambda s: np.interp(s, grid, values, right=0.0)
    else:
        fn = u
    a = abs(rho)
    if a >= R_support:
        return 0.0
    top = math.sqrt(R_support * R_support - a * a)

    def integrand(s):
        return fn(np.sqrt(a * a + s * s)) * s ** (n - 2)

    return sphere_measure(n - 1) * integrate(integrand, 0.0, top, abs_tol=tol.quad_abs_tol)

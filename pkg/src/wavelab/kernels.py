"""Kernels of the 1D representation formula for u_tt - (1+t)^(2l) u_xx = f.

E(t, x; b, y) is the fundamental solution built from F(g, g; 1; .) with
g = l/(2(l+1)). K1 and K0 are the kernels acting on the initial velocity
and the initial position. All kernel functions accept an array for the
spatial offset ``y`` so they can be fed straight to the quadrature.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConeViolation, DomainError
from .specfun import DEFAULT_TOL, Tolerance, hyp2f1

CONE_TOL = 1e-12


@dataclass(frozen=True)
class KernelParams:
    ell: float

    def __post_init__(self):
        if not self.ell >= 0:
            raise DomainError(f"ell must be >= 0, got {self.ell}")

    @property
    def gamma(self):
        return self.ell / (2.0 * (self.ell + 1.0))

    @property
    def c_ell(self):
        l1 = self.ell + 1.0
        return 2.0 ** (-1.0 / l1) * l1 ** (-self.ell / l1)


@dataclass(frozen=True)
class ConePoint:
    t: float
    b: float
    y: float

    def check(self, params):
        _offsets(self.t, self.b, self.y, params.ell)
        return self


def phi(tau, ell):
    return np.power(tau, ell + 1.0) / (ell + 1.0)


def A(t, ell):
    """Integrated speed phi(1+t) - phi(1); the light-cone radius at time t."""
    return (np.power(1.0 + np.asarray(t, dtype=float), ell + 1.0) - 1.0) / (ell + 1.0)


def A_inv(z, ell):
    return np.power((ell + 1.0) * np.asarray(z, dtype=float) + 1.0, 1.0 / (ell + 1.0)) - 1.0


def cone_width(t, b, ell):
    """|phi(1+t) - phi(1+b)|, the half-width of the cone at source time b."""
    return abs(A(t, ell) - A(b, ell))


def _offsets(t, b, y, ell):
    """|y| clamped onto the closed cone; ConeViolation if it is clearly outside."""
    if t < 0 or b < 0:
        raise DomainError("times must be >= 0")
    w = cone_width(t, b, ell)
    ay = np.abs(np.asarray(y, dtype=float))
    excess = ay - w
    if np.any(excess > CONE_TOL):
        worst = float(np.max(excess))
        raise ConeViolation(f"offset exceeds the cone half-width {w:.17g} by {worst:.3g}")
    return np.minimum(ay, w), w


def _pieces(t, b, y, ell):
    """phi(1+t), phi(1+b), D = (P+Q)^2 - y^2 and the hypergeometric argument z."""
    ay, w = _offsets(t, b, y, ell)
    p, q = phi(1.0 + t, ell), phi(1.0 + b, ell)
    s = p + q
    d = (s - ay) * (s + ay)
    # factored numerator avoids cancellation near the cone boundary
    z = np.maximum((w - ay) * (w + ay), 0.0) / d
    return p, q, d, z


def _out(val, y):
    return float(val) if np.ndim(y) == 0 else val


def hyp_argument(t, y, b, params):
    return _out(_pieces(t, b, y, params.ell)[3], y)


def E(t, y, b, params, tol=DEFAULT_TOL):
    """E(t, y; b, 0) = ((phi(1+t)+phi(1+b))^2 - y^2)^(-g) F(g, g; 1; z)."""
    g = params.gamma
    _, _, d, z = _pieces(t, b, y, params.ell)
    if g == 0.0:
        return _out(np.ones_like(z), y)
    return _out(d**-g * hyp2f1(g, g, 1.0, z, tol), y)


def E_general(t, x, t0, x0, params, tol=DEFAULT_TOL):
    """E(t, x; t0, x0), which depends on the space variables only through x - x0."""
    return E(t, np.asarray(x, dtype=float) - x0, t0, params, tol)


def dE_dy(t, y, b, params, tol=DEFAULT_TOL):
    g = params.gamma
    yarr = np.asarray(y, dtype=float)
    p, q, d, z = _pieces(t, b, y, params.ell)
    if g == 0.0:
        return _out(np.zeros_like(z), y)
    dz = -8.0 * p * q * yarr / d**2
    val = 2.0 * g * yarr * d ** (-g - 1.0) * hyp2f1(g, g, 1.0, z, tol)
    val = val + d**-g * g * g * hyp2f1(g + 1.0, g + 1.0, 2.0, z, tol) * dz
    return _out(val, y)


def dE_db(t, y, b, params, tol=DEFAULT_TOL):
    """d/db of E(t, y; b, 0). Nonpositive for b in [0, t]."""
    g, ell = params.gamma, params.ell
    yarr = np.asarray(y, dtype=float)
    q, p, d, z = _pieces(t, b, y, ell)  # p = phi(1+b), q = phi(1+t)
    if g == 0.0:
        return _out(np.zeros_like(z), y)
    speed = (1.0 + b) ** ell
    first = -2.0 * g * speed * (p + q) * d ** (-g - 1.0) * hyp2f1(g, g, 1.0, z, tol)
    dz = 4.0 * speed * q * (p * p - q * q + yarr * yarr) / d**2
    second = g * g * d**-g * hyp2f1(g + 1.0, g + 1.0, 2.0, z, tol) * dz
    return _out(first + second, y)


def K1(t, y, params, tol=DEFAULT_TOL):
    """Velocity kernel c_l E(t, y; 0, 0)."""
    return params.c_ell * E(t, y, 0.0, params, tol)


def K0(t, y, params, tol=DEFAULT_TOL):
    """Position kernel -c_l dE/db(t, y; b, 0) at b = 0."""
    return -params.c_ell * dE_db(t, y, 0.0, params, tol)


# closed forms on the cone boundary


def boundary_value(t, b, params):
    g, ell = params.gamma, params.ell
    return 2.0 ** (-2 * g) * (ell + 1.0) ** (2 * g) * (1.0 + t) ** (-ell / 2) * (1.0 + b) ** (-ell / 2)


def boundary_slope(t, b, params):
    g, ell = params.gamma, params.ell
    return (
        2.0 ** (-2 * g - 3)
        * ell
        * (ell + 2.0)
        * (ell + 1.0) ** (2 * g)
        * (1.0 + t) ** (-1.5 * ell - 1.0)
        * (1.0 + b) ** (-1.5 * ell - 1.0)
        * (phi(1.0 + t, ell) - phi(1.0 + b, ell))
    )


def reflected_value(t, y, params):
    """E(A^-1(A(t) - y), y; t, 0)."""
    g, ell = params.gamma, params.ell
    return 2.0 ** (-2 * g) * (ell + 1.0) ** g * (1.0 + t) ** (-ell / 2) * (phi(1.0 + t, ell) - y) ** -g


def reflected_slope(t, y, params):
    """dE/db(t, y; b, 0) at b = A^-1(A(t) - y)."""
    g, ell = params.gamma, params.ell
    pt = phi(1.0 + t, ell)
    return (
        -(2.0 ** (-2 * g - 1))
        * (ell + 1.0) ** (2 * g)
        * (pt - y) ** (g - 1.0)
        * pt ** (-g - 1.0)
        * (g * (2 * pt - y) + g * g * y)
    )


def _rel_dev(lhs, rhs):
    lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    dev = np.where(scale > 0, np.abs(lhs - rhs) / np.where(scale > 0, scale, 1.0), 0.0)
    return float(np.max(dev))


LEMMA_IDENTITIES = (
    "symmetry_t_b",
    "symmetry_x_y",
    "translation",
    "evenness",
    "boundary_value",
    "boundary_slope",
    "reflected_value",
    "reflected_slope",
)


@dataclass
class LemmaReport:
    t: float
    b: float
    ell: float
    deviations: dict

    @property
    def max_deviation(self):
        return max(self.deviations.values())

    def passed(self, threshold=1e-10):
        return self.max_deviation <= threshold


def verify_lemma41(t, b, params, tol=DEFAULT_TOL, rng=None, samples=8):
    """Check the eight kernel identities at (t, b) and report max relative deviations.

    Symmetry identities are evaluated at random admissible offsets; the
    boundary identities at y = A(t) - A(b), which also makes
    A^-1(A(t) - y) = b for the reflected pair.
    """
    if not 0 <= b < t:
        raise DomainError("need 0 <= b < t")
    rng = np.random.default_rng(0) if rng is None else rng
    ell = params.ell
    w = cone_width(t, b, ell)
    x0 = rng.uniform(-2.0, 2.0, samples)
    x = x0 + rng.uniform(-w, w, samples)
    s = rng.uniform(-w, w, samples)

    dev = {}
    lhs = E_general(t, x, b, x0, params, tol)
    dev["symmetry_t_b"] = _rel_dev(lhs, E_general(b, x, t, x0, params, tol))
    dev["symmetry_x_y"] = _rel_dev(lhs, E_general(t, x0, b, x, params, tol))
    dev["translation"] = _rel_dev(lhs, E_general(b, x - x0, t, 0.0, params, tol))
    dev["evenness"] = _rel_dev(E_general(t, -s, b, 0.0, params, tol), E_general(b, s, t, 0.0, params, tol))

    y = A(t, ell) - A(b, ell)
    dev["boundary_value"] = _rel_dev(E(t, y, b, params, tol), boundary_value(t, b, params))
    dev["boundary_slope"] = _rel_dev(dE_dy(t, y, b, params, tol), boundary_slope(t, b, params))
    bb = A_inv(A(t, ell) - y, ell)
    dev["reflected_value"] = _rel_dev(E(bb, y, t, params, tol), reflected_value(t, y, params))
    dev["reflected_slope"] = _rel_dev(dE_db(t, y, bb, params, tol), reflected_slope(t, y, params))
    return LemmaReport(t, b, ell, dev)


STENCIL_TOL = Tolerance(rel_tol=1e-15)


def pde_residual(t, y, b, params, h=1e-2, tol=STENCIL_TOL):
    """Relative residual of E_bb - (1+b)^(2l) E_yy by 5-point stencils.

    (t, y, b) must sit at least 2h inside the cone in both directions.
    Round-off in the stencil grows like 1/h^2, hence the fairly large
    default step and the tight series tolerance.
    """
    c = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h * h)
    steps = np.arange(-2, 3) * h
    e_bb = sum(ci * E(t, y, b + s, params, tol) for ci, s in zip(c, steps))
    e_yy = float(np.dot(c, E(t, y + steps, b, params, tol)))
    rhs = (1.0 + b) ** (2 * params.ell) * e_yy
    scale = max(abs(e_bb), abs(rhs))
    return 0.0 if scale == 0 else abs(e_bb - rhs) / scale

"""Special functions needed by the kernels and the blow-up test functions.

Everything here is evaluated from its defining series or integral:

* the Gauss hypergeometric function 2F1 on [0, 1),
* the modified Bessel function K_nu through its cosh-integral,
* the time factor lambda(t) of the test function psi = lambda(t) phi(x),
* phi(x), the integral of exp(x . omega) over the unit sphere.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, InvalidParam, NonConvergent
from .quadrature import integrate


@dataclass(frozen=True)
class Tolerance:
    rel_tol: float = 1e-12
    max_terms: int = 10000
    quad_abs_tol: float = 1e-12

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise InvalidParam("rel_tol must be positive")
        if self.max_terms < 1:
            raise InvalidParam("max_terms must be >= 1")
        if not self.quad_abs_tol > 0:
            raise InvalidParam("quad_abs_tol must be positive")


DEFAULT_TOL = Tolerance()

# switch points for the hypergeometric evaluation strategy
EULER_FROM = 0.5
CONNECTION_FROM = 0.9
# the continuation cancels badly when c - a - b is close to an integer
CONNECTION_MIN_GAP = 0.01
TAIL_MARGIN = 0.01


def _is_nonpositive_int(x):
    return x <= 0 and float(x).is_integer()


def _rgamma(x):
    """1/Gamma(x), zero at the poles."""
    if _is_nonpositive_int(x):
        return 0.0
    return 1.0 / math.gamma(x)


def _series(a, b, c, z, tol):
    z = np.asarray(z, dtype=float)
    absz = np.abs(z)
    total = np.ones_like(z)
    term = np.ones_like(z)
    # past this index the coefficient ratio is monotone in h
    settled = 2.0 * (abs(a) + abs(b) + abs(c)) + 2.0
    for h in range(tol.max_terms):
        coef = (a + h) * (b + h) / ((c + h) * (h + 1.0))
        term = term * coef * z
        total = total + term
        if not np.any(term):
            return total
        nxt = abs((a + h + 1) * (b + h + 1) / ((c + h + 1) * (h + 2)))
        if h < settled and nxt > 1.0:
            continue
        # later ratios stay below max(nxt, 1), so the tail is geometric
        q = max(nxt, 1.0) * absz
        if np.any(q >= 1.0):
            continue
        tail = np.abs(term) * q / (1.0 - q)
        # margin below rel_tol for round-off in the partial sums
        if np.all(tail <= TAIL_MARGIN * tol.rel_tol * np.abs(total)):
            return total
    raise NonConvergent(
        f"2F1({a}, {b}; {c}; z) series did not converge in {tol.max_terms} terms"
    )


def _euler(a, b, c, z, tol):
    z = np.asarray(z, dtype=float)
    return (1.0 - z) ** (c - a - b) * _series(c - a, c - b, c, z, tol)


def _connection_ok(a, b, c):
    s = c - a - b
    return abs(s - round(s)) > CONNECTION_MIN_GAP


def _connection(a, b, c, z, tol):
    """Analytic continuation around z = 1 for non-integer c - a - b."""
    z = np.asarray(z, dtype=float)
    w = 1.0 - z
    s = c - a - b
    gc = math.gamma(c)
    first = gc * math.gamma(s) * _rgamma(c - a) * _rgamma(c - b)
    second = gc * math.gamma(-s) * _rgamma(a) * _rgamma(b)
    out = np.zeros_like(z)
    if first != 0.0:
        out = out + first * _series(a, b, 1.0 - s, w, tol)
    if second != 0.0:
        out = out + second * w**s * _series(c - a, c - b, 1.0 + s, w, tol)
    return out


def hyp2f1(a, b, c, z, tol=DEFAULT_TOL, method="auto"):
    """Gauss hypergeometric function F(a, b; c; z) for real 0 <= z < 1.

    ``z`` may be a scalar or an array. ``method`` picks the evaluation route:
    ``"direct"`` sums the defining power series, ``"euler"`` sums it after
    the Euler transformation, ``"auto"`` uses the direct series up to
    z = 1/2, the Euler form beyond, and the continuation around z = 1 for
    z > 0.9 when c - a - b is not within 0.01 of an integer. Integer
    c - a - b close to z = 1 (the logarithmic case) is only reachable by the
    slowly converging Euler series and may raise NonConvergent.
    """
    if _is_nonpositive_int(c):
        raise InvalidParam(f"c = {c} is a nonpositive integer")
    zarr = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(zarr)) or np.any(zarr < 0.0) or np.any(zarr >= 1.0):
        raise InvalidParam("hyp2f1 requires 0 <= z < 1")

    if method == "direct":
        out = _series(a, b, c, zarr, tol)
    elif method == "euler":
        out = _euler(a, b, c, zarr, tol)
    elif method == "auto":
        terminating = _is_nonpositive_int(a) or _is_nonpositive_int(b)
        out = np.empty_like(zarr)
        low = zarr <= EULER_FROM
        if terminating:
            low = np.ones_like(zarr, dtype=bool)
        high = ~low & (zarr > CONNECTION_FROM) & _connection_ok(a, b, c)
        mid = ~low & ~high
        if np.any(low):
            out[low] = _series(a, b, c, zarr[low], tol)
        if np.any(mid):
            out[mid] = _euler(a, b, c, zarr[mid], tol)
        if np.any(high):
            out[high] = _connection(a, b, c, zarr[high], tol)
    else:
        raise InvalidParam(f"unknown method {method!r}")
    return float(out) if out.ndim == 0 else out


def hyp2f1_deriv(a, b, c, z, tol=DEFAULT_TOL):
    """d/dz F(a, b; c; z) = (ab/c) F(a+1, b+1; c+1; z)."""
    if _is_nonpositive_int(c):
        raise InvalidParam(f"c = {c} is a nonpositive integer")
    factor = a * b / c
    if factor == 0.0:
        zarr = np.asarray(z, dtype=float)
        if np.any(zarr < 0.0) or np.any(zarr >= 1.0):
            raise InvalidParam("hyp2f1 requires 0 <= z < 1")
        return 0.0 if zarr.ndim == 0 else np.zeros_like(zarr)
    return factor * hyp2f1(a + 1.0, b + 1.0, c + 1.0, z, tol)


def _cosh_cutoff(nu, x, tol):
    # smallest Z on a 1/4 grid with x (cosh Z - 1) - nu Z past the tail target
    target = -math.log(tol.quad_abs_tol) + 5.0
    z = 0.25
    while x * (math.cosh(z) - 1.0) - nu * z < target:
        z += 0.25
        if z > 750.0:
            break
    return z


def _bessel_integral(nu, x, power, tol):
    """int_0^Z cosh(z)^power exp(-x (cosh z - 1)) cosh(nu z) dz."""
    upper = _cosh_cutoff(nu, x, tol)

    def integrand(z):
        ch = np.cosh(z)
        return ch**power * np.exp(-x * (ch - 1.0)) * np.cosh(nu * z)

    return integrate(integrand, 0.0, upper, abs_tol=tol.quad_abs_tol)


def bessel_k(nu, x, tol=DEFAULT_TOL, scaled=False):
    """Modified Bessel function of the second kind K_nu(x), x > 0.

    Evaluated as int_0^inf exp(-x cosh z) cosh(nu z) dz. With ``scaled=True``
    returns exp(x) K_nu(x), which stays representable for large x.
    """
    if not x > 0:
        raise DomainError(f"bessel_k needs x > 0, got {x}")
    if nu < 0:
        raise DomainError("only nu >= 0 is supported")
    val = _bessel_integral(nu, x, 0, tol)
    return val if scaled else math.exp(-x) * val


@lru_cache(maxsize=64)
def _lambda_norm(ell, tol):
    nu = 1.0 / (2.0 * (ell + 1.0))
    return _bessel_integral(nu, 1.0 / (ell + 1.0), 0, tol)


def _lambda_scalar(t, ell, tol):
    """(log lambda(t), lambda'(t)/lambda(t)) for ell > 0."""
    nu = 1.0 / (2.0 * (ell + 1.0))
    x0 = 1.0 / (ell + 1.0)
    x = (1.0 + t) ** (ell + 1.0) / (ell + 1.0)
    k_scaled = _bessel_integral(nu, x, 0, tol)
    dk_scaled = _bessel_integral(nu, x, 1, tol)
    log_lam = 0.5 * math.log1p(t) - (x - x0) + math.log(k_scaled / _lambda_norm(ell, tol))
    log_deriv = 0.5 / (1.0 + t) - (1.0 + t) ** ell * dk_scaled / k_scaled
    return log_lam, log_deriv


def _check_lambda_args(t, ell):
    if ell < 0:
        raise DomainError("ell must be >= 0")
    if np.any(np.asarray(t) < 0):
        raise DomainError("lambda is defined for t >= 0")


def _map(fn, t):
    if np.ndim(t) == 0:
        return fn(float(t))
    t = np.asarray(t, dtype=float)
    return np.array([fn(v) for v in t.ravel()]).reshape(t.shape)


def lambda_log(t, ell, tol=DEFAULT_TOL):
    """log lambda(t); finite even where lambda itself underflows."""
    _check_lambda_args(t, ell)
    if ell == 0:
        return -np.asarray(t, dtype=float) if np.ndim(t) else -float(t)
    return _map(lambda s: _lambda_scalar(s, ell, tol)[0], t)


def lambda_fn(t, ell, tol=DEFAULT_TOL):
    """Time factor of the test function, normalized so lambda(0) = 1.

    lambda(t) = C (1+t)^(1/2) K_nu((1+t)^(ell+1)/(ell+1)), nu = 1/(2(ell+1)).
    It solves lambda'' = (1+t)^(2 ell) lambda; for ell = 0 it is exp(-t).
    """
    _check_lambda_args(t, ell)
    if ell == 0:
        return np.exp(-np.asarray(t, dtype=float)) if np.ndim(t) else math.exp(-t)
    return np.exp(lambda_log(t, ell, tol)) if np.ndim(t) else math.exp(lambda_log(t, ell, tol))


def lambda_log_deriv(t, ell, tol=DEFAULT_TOL):
    """lambda'(t) / lambda(t)."""
    _check_lambda_args(t, ell)
    if ell == 0:
        return -np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else -1.0
    return _map(lambda s: _lambda_scalar(s, ell, tol)[1], t)


def lambda_deriv(t, ell, tol=DEFAULT_TOL):
    """d lambda/dt, differentiated under the integral sign. Always negative."""
    _check_lambda_args(t, ell)
    if ell == 0:
        return -lambda_fn(t, 0.0)

    def one(s):
        log_lam, log_deriv = _lambda_scalar(s, ell, tol)
        return math.exp(log_lam) * log_deriv

    return _map(one, t)


def sphere_measure(n):
    """Surface measure of the unit sphere S^(n-1) in R^n (2 for n = 1)."""
    if n < 1:
        raise DomainError("dimension must be >= 1")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _sphere_exp_scalar(r, n, tol, scaled):
    if n == 1:
        if scaled:
            return 1.0 + math.exp(-2.0 * r)
        return 2.0 * math.cosh(r)
    if n == 3:
        # 4 pi sinh(r)/r in closed form
        val = 4.0 * math.pi if r == 0 else 2.0 * math.pi * -math.expm1(-2.0 * r) / r
        return val if scaled else val * math.exp(r)
    return _sphere_exp_quad(r, n, tol, scaled)


def _sphere_exp_quad(r, n, tol, scaled):
    """|S^(n-2)| int_0^pi exp(r cos t) sin^(n-2) t dt for n >= 2."""
    weight = sphere_measure(n - 1)
    m = n - 2

    def integrand(theta):
        return np.exp(r * (np.cos(theta) - 1.0)) * np.sin(theta) ** m

    # the integrand concentrates near theta = 0 as r grows
    points = None
    if r > 1.0:
        points = [min(math.pi / 2, 8.0 / math.sqrt(r))]
    val = weight * integrate(integrand, 0.0, math.pi, abs_tol=tol.quad_abs_tol, points=points)
    return val if scaled else val * math.exp(r)


def sphere_exp_integral(r, n, tol=DEFAULT_TOL, scaled=False):
    """phi(|x|) = integral over S^(n-1) of exp(x . omega) d sigma.

    ``r`` is |x| (scalar or array). ``scaled=True`` returns exp(-r) phi(r).
    """
    if n < 1 or int(n) != n:
        raise DomainError(f"dimension must be a positive integer, got {n}")
    n = int(n)
    if np.any(np.asarray(r) < 0):
        raise DomainError("radius must be >= 0")
    return _map(lambda s: _sphere_exp_scalar(s, n, tol, scaled), r)

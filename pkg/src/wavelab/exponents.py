"""Critical exponents, the change of variables to the variable-speed model,
and the blow-up verdicts for the scale-invariant damped/massive wave equation

    v_tt - Lap v + mu1/(1+tau) v_tau + mu2^2/(1+tau)^2 v = |v|^p.

Exponents are real-valued functions of a (possibly shifted, non-integer)
dimension. ``math.inf`` is used as the "no upper bound" sentinel.
"""

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional

from .errors import DeltaOutOfRange, DomainError

EQ_RTOL = 1e-12


class Classification(str, Enum):
    HYPERBOLIC = "hyperbolic-like"
    PARABOLIC = "parabolic-like"
    BOUNDARY = "boundary"


class Verdict(str, Enum):
    SUBCRITICAL = "BlowupSubcritical"
    CRITICAL_P1 = "BlowupCriticalP1"
    CRITICAL_P0 = "BlowupCriticalP0"
    NOT_COVERED = "NotCoveredByTheorem"


class KatoCase(str, Enum):
    CASE_I = "CaseI"
    CASE_II = "CaseII"
    INCONCLUSIVE = "Inconclusive"


def _close(a, b, rtol=EQ_RTOL):
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1.0)


def _positive_root(a, b, c):
    """Positive root of a p^2 - b p - c = 0 with a > 0, c > 0."""
    disc = math.sqrt(b * b + 4.0 * a * c)
    if b >= 0:
        return (b + disc) / (2.0 * a)
    # avoid cancellation in b + disc
    return 2.0 * c / (disc - b)


def fujita(m):
    """1 + 2/m."""
    if not m > 0:
        raise DomainError(f"Fujita exponent needs a positive dimension, got {m}")
    return 1.0 + 2.0 / m


def strauss(m):
    """Positive root of (m-1) p^2 - (m+1) p - 2 = 0; inf for m = 1."""
    if m < 1:
        raise DomainError(f"Strauss exponent needs dimension >= 1, got {m}")
    if m == 1:
        return math.inf
    return _positive_root(m - 1.0, m + 1.0, 2.0)


def _check_nlk(n, ell, k, need_k=True):
    if n < 1 or int(n) != n:
        raise DomainError(f"n must be a positive integer, got {n}")
    if ell < 0:
        raise DomainError(f"ell must be >= 0, got {ell}")
    if need_k and not k > -2:
        raise DomainError(f"k must be > -2, got {k}")


def _p1_value(n, ell, k):
    m = (ell + 1.0) * n
    if m - 1.0 <= 0.0:
        return math.inf
    return (m + k + 1.0) / (m - 1.0)


def _p0_value(n, ell, k):
    m = (ell + 1.0) * n
    if m - 1.0 <= 0.0:
        return math.inf
    return _positive_root(m - 1.0, m + 2.0 * k + 1.0 - 2.0 * ell, 2.0 * (ell + 1.0))


def p1_nlk(n, ell, k):
    """((ell+1)n + k + 1) / ((ell+1)n - 1); inf when (ell+1)n = 1."""
    _check_nlk(n, ell, k)
    return _p1_value(n, ell, k)


def p0_nlk(n, ell, k):
    """Positive root of ((l+1)n-1)p^2 - ((l+1)n+2k+1-2l)p - 2(l+1) = 0.

    Reduces to the Strauss exponent for ell = k = 0. Returns inf when
    (ell+1)n = 1, matching the p0(1) = inf convention.
    """
    _check_nlk(n, ell, k)
    return _p0_value(n, ell, k)


def p_ne(n, ell, k):
    return max(p0_nlk(n, ell, k), p1_nlk(n, ell, k))


def delta(mu1, mu2sq):
    return (mu1 - 1.0) ** 2 - 4.0 * mu2sq


@dataclass(frozen=True)
class ScaleInvariantModel:
    n: int
    mu1: float
    mu2sq: float

    def __post_init__(self):
        if self.n < 1 or int(self.n) != self.n:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if self.mu1 < 0 or self.mu2sq < 0:
            raise DomainError("mu1 and mu2sq must be nonnegative")

    @property
    def delta(self):
        return delta(self.mu1, self.mu2sq)

    def sqrt_delta(self):
        d = self.delta
        if not 0.0 < d <= 1.0:
            raise DeltaOutOfRange(
                f"delta = {d:.17g} for mu1={self.mu1}, mu2sq={self.mu2sq}; need 0 < delta <= 1"
            )
        return math.sqrt(d)


@dataclass(frozen=True)
class TransformedModel:
    n: int
    ell: float
    k: float

    def __post_init__(self):
        _check_nlk(self.n, self.ell, self.k, need_k=False)

    @property
    def gamma(self):
        return self.ell / (2.0 * (self.ell + 1.0))

    @property
    def nu(self):
        return 1.0 / (2.0 * (self.ell + 1.0))

    @property
    def c_ell(self):
        l1 = self.ell + 1.0
        return 2.0 ** (-1.0 / l1) * l1 ** (-self.ell / l1)

    @property
    def admissible(self):
        """Whether k > -2, as the blow-up theorem for the transformed problem requires."""
        return self.k > -2


def transform_params(model, p):
    """(n, mu1, mu2^2, p) -> (n, ell, k) of u_tt - (1+t)^(2l) Lap u = (l+1)^2 (1+t)^k |u|^p."""
    if not p > 1:
        raise DomainError("p must be > 1")
    sd = model.sqrt_delta()
    ell = (1.0 - sd) / sd
    k = (1.0 - model.mu1 - sd) / (2.0 * sd) * (p - 1.0) + 2.0 * (1.0 - sd) / sd
    return TransformedModel(model.n, ell, k)


def transform_data(v0, v1, model):
    """Initial data of the transformed problem from (v0, v1).

    u0(x) = v0(x/sqrt(delta)),
    u1(x) = (v1(x/sqrt(delta)) + (mu1 - 1 + sqrt(delta))/2 * v0(x/sqrt(delta))) / sqrt(delta).
    Supports shrink by the factor sqrt(delta).
    """
    sd = model.sqrt_delta()
    shift = (model.mu1 - 1.0 + sd) / 2.0

    def u0(x):
        return v0(x / sd)

    def u1(x):
        y = x / sd
        return (v1(y) + shift * v0(y)) / sd

    return u0, u1


def original_coordinates(t, x, ell):
    """Map (t, x) of the transformed problem to (tau, y) of the original one."""
    return (1.0 + t) ** (ell + 1.0) - 1.0, (1.0 + ell) * x


def strauss_branch(model):
    return strauss(model.n + model.mu1)


def fujita_branch(model):
    sd = model.sqrt_delta()
    m = model.n + (model.mu1 - 1.0) / 2.0 - sd / 2.0
    if m <= 0.0:
        # only n = 1, mu1 = 0, delta = 1, where the Strauss branch is inf too
        return math.inf
    return fujita(m)


def p_mu(n, mu1, mu2sq):
    """max{p0(n + mu1), p_Fuj(n + (mu1-1)/2 - sqrt(delta)/2)}."""
    model = ScaleInvariantModel(n, mu1, mu2sq)
    return max(strauss_branch(model), fujita_branch(model))


def _dominance(p_strauss, p_fujita):
    if _close(p_strauss, p_fujita):
        return Classification.BOUNDARY
    if p_strauss > p_fujita:
        return Classification.HYPERBOLIC
    return Classification.PARABOLIC


def classify(n, mu1, mu2sq):
    """Which branch of p_mu dominates: Strauss (hyperbolic-like) or Fujita."""
    model = ScaleInvariantModel(n, mu1, mu2sq)
    return _dominance(strauss_branch(model), fujita_branch(model))


def mu1_threshold(n):
    """(n^2 + n + 2)/(n + 2): p0(n + mu1) >= p_Fuj(n) exactly for mu1 up to this value."""
    return (n * n + n + 2.0) / (n + 2.0)


def locate_mu1_threshold(n, tol=1e-12):
    """Bisect classify(n, mu1, 0) for the hyperbolic -> non-hyperbolic flip.

    Searches mu1 in (1, 2], where mu2 = 0 keeps delta in (0, 1]. Returns
    None when the flip lies beyond mu1 = 2 (n >= 3).
    """
    lo, hi = 1.0 + 1e-9, 2.0

    def hyperbolic(m):
        return classify(n, m, 0.0) is Classification.HYPERBOLIC

    if not hyperbolic(lo):
        return None
    if hyperbolic(hi):
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if hyperbolic(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _critical_verdict(p, bound, p_strauss_like, p_fujita_like, n):
    if p < bound and not _close(p, bound):
        return Verdict.SUBCRITICAL
    if not _close(p, bound):
        return Verdict.NOT_COVERED
    if n >= 2 and _close(p, p_strauss_like):
        return Verdict.CRITICAL_P0
    if _close(p, p_fujita_like):
        return Verdict.CRITICAL_P1
    return Verdict.NOT_COVERED


def data_conditions(model):
    sd = model.sqrt_delta()
    shift = (model.mu1 - 1.0 + sd) / 2.0
    return (
        "v0, v1 nontrivial and compactly supported; "
        f"v0 >= 0, v1 + {shift:.17g} * v0 >= 0"
    )


def blowup_verdict(n, mu1, mu2sq, p):
    """Blow-up verdict for the scale-invariant model at exponent p.

    Compares p with the two branches of p_mu directly in the original
    variables, since the transformed weight k itself depends on p. At a
    critical p equal to both branches the Strauss-type verdict is reported
    when n >= 2; the Strauss-critical case is not covered for n = 1.
    """
    return _model_verdict(ScaleInvariantModel(n, mu1, mu2sq), p)


def _model_verdict(model, p):
    if not p > 1:
        raise DomainError("p must be > 1")
    ps, pf = strauss_branch(model), fujita_branch(model)
    return _critical_verdict(p, max(ps, pf), ps, pf, model.n)


def transformed_verdict(n, ell, k, p):
    """Verdict of the blow-up theorem for the variable-speed problem itself."""
    if not p > 1:
        raise DomainError("p must be > 1")
    p0, p1 = p0_nlk(n, ell, k), p1_nlk(n, ell, k)
    return _critical_verdict(p, max(p0, p1), p0, p1, n)


def transformed_predicates(model, p):
    """(p < p0(n; l, k), p < p1(n; l, k)) with (l, k) from transform_params.

    k depends on p here and may fall below -2, so the roots are taken
    without the k > -2 restriction.
    """
    tm = transform_params(model, p)
    return p < _p0_value(tm.n, tm.ell, tm.k), p < _p1_value(tm.n, tm.ell, tm.k)


def kato_check(p, q, a, k0=1.0, k1=1.0, a_tol=EQ_RTOL):
    """Which case of Kato's lemma applies to F'' >= k1 (t+R)^-q F^p, F >= k0 (t+R)^a.

    Case II needs k0 "sufficiently large"; only the structural condition
    q >= p + 1 and a = (q-2)/(p-1) is checked. ``a_tol`` is the relative
    tolerance for that equality, loosened when ``a`` is a fitted value.
    """
    if not p > 1:
        raise DomainError("p must be > 1")
    if not (k0 > 0 and k1 > 0):
        raise DomainError("k0 and k1 must be positive")
    threshold = (q - 2.0) / (p - 1.0)
    on_threshold = _close(a, threshold, a_tol)
    at_least_linear = a >= 1.0 or _close(a, 1.0, a_tol)
    if at_least_linear and a > threshold and not on_threshold:
        return KatoCase.CASE_I
    if q >= p + 1.0 and on_threshold:
        return KatoCase.CASE_II
    return KatoCase.INCONCLUSIVE


@dataclass
class ExponentReport:
    p_fujita: float
    p_strauss: float
    p1_nlk: Optional[float]
    p0_nlk: Optional[float]
    p_ne: Optional[float]
    p_mu: Optional[float]
    classification: Classification
    verdict: Optional[Verdict] = None
    p: Optional[float] = None
    delta: Optional[float] = None
    ell: Optional[float] = None
    k: Optional[float] = None
    data_conditions: Optional[str] = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        out = {}
        for key, val in asdict(self).items():
            if isinstance(val, Enum):
                val = val.value
            elif isinstance(val, float) and math.isinf(val):
                val = "inf"
            elif key == "notes":
                val = "; ".join(val)
            out[key] = val
        return out


def exponent_report(n, mu1, mu2sq, p=None):
    """All exponents, classification and (for given p) the verdict."""
    model = ScaleInvariantModel(n, mu1, mu2sq)
    ps, pf = strauss_branch(model), fujita_branch(model)
    report = ExponentReport(
        p_fujita=pf,
        p_strauss=ps,
        p1_nlk=None,
        p0_nlk=None,
        p_ne=None,
        p_mu=max(ps, pf),
        classification=_dominance(ps, pf),
        delta=model.delta,
        data_conditions=data_conditions(model),
    )
    if p is not None:
        tm = transform_params(model, p)
        report.p = p
        report.ell, report.k = tm.ell, tm.k
        report.verdict = _model_verdict(model, p)
        if tm.admissible:
            report.p1_nlk = p1_nlk(tm.n, tm.ell, tm.k)
            report.p0_nlk = p0_nlk(tm.n, tm.ell, tm.k)
            report.p_ne = max(report.p0_nlk, report.p1_nlk)
        else:
            report.notes.append(
                f"k = {tm.k:.17g} <= -2: transformed exponents undefined, verdict from the original variables"
            )
    return report


def transformed_report(n, ell, k, p=None):
    """Report for the variable-speed problem given (n, ell, k) directly."""
    p0, p1 = p0_nlk(n, ell, k), p1_nlk(n, ell, k)
    report = ExponentReport(
        p_fujita=fujita(n),
        p_strauss=strauss(n),
        p1_nlk=p1,
        p0_nlk=p0,
        p_ne=max(p0, p1),
        p_mu=None,
        classification=_dominance(p0, p1),
        ell=ell,
        k=k,
        data_conditions="u0, u1 >= 0, compactly supported, u0 not identically 0",
    )
    if p is not None:
        report.p = p
        report.verdict = transformed_verdict(n, ell, k, p)
    return report

"""Closed-form OQR results for pure sources without distillation.

With f0 = 1 and k = 0 every quantity depends on p_g and n only through
``x = p_g ** n_bar`` where ``n_bar = 2**n - 1`` counts intermediate stations.
Derivatives with respect to n treat it as a continuous variable.
"""
from dataclasses import dataclass
import math

from .bell import BellDiagonalState, TSIRELSON, binary_entropy, check_probability
from .errors import DomainError

__all__ = [
    "SensitivityReport",
    "n_bar",
    "closed_coeffs",
    "closed_observables",
    "chsh_condition",
    "closed_secret_fractions",
    "r_dd_formula",
    "r_di_formula",
    "artanh",
    "q_fn",
    "derivatives_dd",
    "derivatives_di",
    "sensitivity",
    "eta_impact_limit",
    "di_key_threshold",
]

LN2 = math.log(2.0)
CHSH_THRESHOLD = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class SensitivityReport:
    d_eta_dd: float
    d_pg_dd: float
    d_n_dd: float
    d_eta_di: float
    d_pg_di: float
    d_n_di: float
    r_dd: float
    r_di: float
    n_bar: int
    chsh: bool


def n_bar(n):
    """Number of intermediate stations, 2^n - 1 (n may be fractional)."""
    return 2.0**n - 1.0


def _x(p_g, n):
    return p_g ** n_bar(n)


def closed_coeffs(p_g, n):
    p_g = check_probability("p_g", p_g)
    x = _x(p_g, n)
    rest = (1.0 - x) / 4.0
    return BellDiagonalState((1.0 + 3.0 * x) / 4.0, rest, rest, rest)


def closed_observables(p_g, eta_d, n):
    """Return (Q_DD, Q_z^DI, S); Q_x = Q_z in the DD case."""
    x = _x(check_probability("p_g", p_g), n)
    y = check_probability("eta_d", eta_d) ** 2 * x
    return (1.0 - x) / 2.0, (1.0 - y) / 2.0, TSIRELSON * y


def chsh_condition(p_g, eta_d, n):
    return eta_d * eta_d * _x(p_g, n) > CHSH_THRESHOLD


def r_dd_formula(p_g, eta_d, n):
    """eta_d^2 [1 - 2 h((1 - x)/2)] without clamping (smooth in all arguments)."""
    x = _x(p_g, n)
    return eta_d * eta_d * (1.0 - 2.0 * binary_entropy((1.0 - x) / 2.0))


def r_di_formula(p_g, eta_d, n):
    """Unclamped DI secret fraction; requires a strict CHSH violation."""
    y = eta_d * eta_d * _x(p_g, n)
    z2 = 2.0 * y * y - 1.0
    if z2 < 0.0:
        raise DomainError(f"no CHSH violation: eta_d^2 p_g^n_bar={y!r} <= 1/sqrt2")
    return 1.0 - binary_entropy((1.0 - y) / 2.0) - binary_entropy(0.5 + 0.5 * math.sqrt(z2))


def closed_secret_fractions(p_g, eta_d, n):
    """(r_DD, r_DI), both clamped at zero; r_DD carries the eta_d^2 click factor."""
    r_dd = max(0.0, r_dd_formula(p_g, eta_d, n))
    if not chsh_condition(p_g, eta_d, n):
        return r_dd, 0.0
    return r_dd, max(0.0, r_di_formula(p_g, eta_d, n))


def artanh(x):
    if not -1.0 < x < 1.0:
        raise DomainError(f"artanh argument {x!r} outside (-1, 1)")
    return 0.5 * math.log((1.0 + x) / (1.0 - x))


def _artanh_or_inf(x):
    return math.inf if x >= 1.0 else artanh(x)


def q_fn(eta_d, p_g, nbar):
    """Common factor of the DI derivatives; diverges as eta_d^2 p_g^nbar -> 1."""
    x = eta_d * eta_d * p_g**nbar
    z2 = 2.0 * x * x - 1.0
    if z2 <= 0.0:
        raise DomainError(f"q is only defined above the CHSH threshold (x={x!r})")
    z = math.sqrt(z2)
    return 2.0 * x / z * _artanh_or_inf(z) + _artanh_or_inf(x)


def derivatives_dd(eta_d, p_g, n):
    """(d/d eta_d, d/d p_g, d/d n) of the effective DD secret fraction.

    At p_g = 1 the p_g-derivative is +inf and the n-derivative is 0 * inf; both
    are reported as the limit (inf and 0) rather than raised.
    """
    nb = n_bar(n)
    x = p_g**nb
    d_eta = 2.0 * eta_d * (1.0 - 2.0 * binary_entropy((1.0 - x) / 2.0))
    if x >= 1.0:
        return d_eta, (math.inf if nb > 0 else 0.0), 0.0
    at = artanh(x)
    d_pg = 2.0 * nb * eta_d**2 * p_g ** (nb - 1.0) / LN2 * at
    d_n = 2.0 * (nb + 1.0) * eta_d**2 * x * math.log(p_g) * at
    return d_eta, d_pg, d_n


def derivatives_di(eta_d, p_g, n):
    """(d/d eta_d, d/d p_g, d/d n) of the DI secret fraction above the CHSH threshold."""
    if not chsh_condition(p_g, eta_d, n):
        raise DomainError("DI derivatives need eta_d^2 p_g^n_bar > 1/sqrt2")
    nb = n_bar(n)
    x = p_g**nb
    q = q_fn(eta_d, p_g, nb)
    d_eta = 2.0 * eta_d * x / LN2 * q
    d_pg = nb * eta_d**2 * p_g ** (nb - 1.0) / LN2 * q
    d_n = (nb + 1.0) * eta_d**2 * x * math.log(p_g) * q if p_g < 1.0 else 0.0
    return d_eta, d_pg, d_n


def sensitivity(p_g, eta_d, n):
    d_dd = derivatives_dd(eta_d, p_g, n)
    r_dd, r_di = closed_secret_fractions(p_g, eta_d, n)
    chsh = chsh_condition(p_g, eta_d, n)
    if chsh:
        d_di = derivatives_di(eta_d, p_g, n)
    else:
        d_di = (math.nan, math.nan, math.nan)
    return SensitivityReport(*d_dd, *d_di, r_dd=r_dd, r_di=r_di, n_bar=int(round(n_bar(n))), chsh=chsh)


def eta_impact_limit():
    """Limit of eta_d * d r_DI / d eta_d at the CHSH threshold."""
    return math.sqrt(2.0) / LN2 * (artanh(CHSH_THRESHOLD) + math.sqrt(2.0))


def di_key_threshold(tol=1e-15):
    """Smallest eta_d^2 p_g^n_bar with a positive DI secret fraction.

    Just above the CHSH threshold the second entropy term is close to 1, so
    the DI bound is negative there; it only turns positive further in.
    """
    lo, hi = CHSH_THRESHOLD, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        z = math.sqrt(max(2.0 * mid * mid - 1.0, 0.0))
        if 1.0 - binary_entropy((1.0 - mid) / 2.0) - binary_entropy(0.5 + 0.5 * z) > 0.0:
            hi = mid
        else:
            lo = mid
    return hi

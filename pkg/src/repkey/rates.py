"""Link budgets, waiting-time combinatorics and repeater rates.

Units: km for lengths, seconds for times, Hz for rates.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError

__all__ = [
    "LinkBudget",
    "RateTrace",
    "transmittivity",
    "link_budget",
    "zn",
    "z1_closed",
    "a_constant",
    "distilled_link_probability",
    "distilled_link_probability_product",
    "deterministic_rate",
    "probabilistic_rate",
    "probabilistic_rate_product",
    "oqr_probabilistic_rate",
    "SMALL_P_WARNING",
]

ZN_MAX_N = 20
# alternating sum only below this many pairs; beyond it, use the tail series
ZN_ALTERNATING_MAX = 64
ZN_REL_TAIL = 1e-12
# warn when the elementary success probability leaves the p << 1 regime
SMALL_P_WARNING = 0.2


@dataclass(frozen=True)
class LinkBudget:
    l0: float
    alpha: float
    c_fiber: float
    t0: float
    eta_t: float


@dataclass
class RateTrace:
    p0: float
    p_ed: list = field(default_factory=list)
    p_es: list = field(default_factory=list)
    a_ed: list = field(default_factory=list)
    a_es: list = field(default_factory=list)
    rate_hz: float = 0.0
    formula: str = ""
    warnings: list = field(default_factory=list)


def transmittivity(l0, alpha=0.17):
    """Fiber transmission 10^(-alpha l0 / 10) for length l0 [km], alpha [dB/km]."""
    if l0 < 0:
        raise DomainError(f"negative fiber length l0={l0!r}")
    if alpha <= 0:
        raise DomainError(f"attenuation alpha={alpha!r} must be positive")
    return 10.0 ** (-alpha * l0 / 10.0)


def link_budget(l0, alpha=0.17, c_fiber=2e8):
    if l0 <= 0:
        raise DomainError(f"segment length l0={l0!r} must be positive")
    if c_fiber <= 0:
        raise DomainError(f"fiber light speed c={c_fiber!r} must be positive")
    t0 = 2.0 * l0 * 1e3 / c_fiber
    return LinkBudget(l0=l0, alpha=alpha, c_fiber=c_fiber, t0=t0, eta_t=transmittivity(l0, alpha))


def _check_p(p, name="p"):
    p = float(p)
    if not 0.0 < p <= 1.0:
        raise DomainError(f"{name}={p!r} outside (0, 1]")
    return p


def _zn_alternating(n_pairs, p):
    log_q = math.log1p(-p)
    terms = [
        (-1) ** (j + 1) * math.comb(n_pairs, j) / -math.expm1(j * log_q)
        for j in range(1, n_pairs + 1)
    ]
    value = math.fsum(terms)
    # each term carries one rounding of relative size eps
    err = 4 * np.finfo(float).eps * math.fsum(abs(t) for t in terms)
    return value, err


def _zn_series(n_pairs, p, max_terms=10**9):
    """E[max of n_pairs geometrics] = sum_{m>=0} 1 - (1 - q^m)^n_pairs."""
    q = 1.0 - p
    if q == 0.0:
        return 1.0
    # tail after M terms is below n_pairs q^M / p; Z_n >= 1/p
    m_stop = math.ceil(math.log(ZN_REL_TAIL / n_pairs) / math.log(q)) + 1
    if m_stop > max_terms:
        raise DomainError(f"Z_n series needs {m_stop} terms for p={p!r}")
    total = 1.0  # m = 0 term
    chunk = 1 << 20
    log_q = math.log(q)
    for start in range(1, m_stop, chunk):
        m = np.arange(start, min(start + chunk, m_stop), dtype=float)
        qm = np.exp(m * log_q)
        total += float(np.sum(-np.expm1(n_pairs * np.log1p(-qm))))
    return total


def zn(n, p):
    """Expected number of attempts until all 2^n links succeed (each with probability p)."""
    n = int(n)
    if not 0 <= n <= ZN_MAX_N:
        raise DomainError(f"nesting level n={n!r} outside [0, {ZN_MAX_N}]")
    p = _check_p(p)
    if p == 1.0:
        return 1.0
    if n == 0:
        return 1.0 / p
    n_pairs = 2**n
    if n_pairs <= ZN_ALTERNATING_MAX:
        value, err = _zn_alternating(n_pairs, p)
        if err <= 1e-12 * abs(value):
            return value
    return _zn_series(n_pairs, p)


def z1_closed(p):
    """Expected maximum of two geometric waiting times, (3 - 2p)/((2 - p) p)."""
    p = _check_p(p)
    return (3.0 - 2.0 * p) / ((2.0 - p) * p)


def a_constant(p):
    """(1 - 2p/3)/(1 - p/2): correction for waiting on two links instead of one."""
    p = _check_p(p)
    return (1.0 - 2.0 * p / 3.0) / (1.0 - p / 2.0)


def distilled_link_probability(p0, p_ed):
    """Iterate P^(j) = P_ED^(j) / Z_1(P^(j-1)); return (P^(k), [a(P^(0)), ..., a(P^(k-1))])."""
    p = _check_p(p0, "p0")
    a_ed = []
    for j, pj in enumerate(p_ed, start=1):
        pj = _check_p(pj, f"p_ed[{j}]")
        a_ed.append(a_constant(p))
        p = pj / zn(1, p)
    return p, a_ed


def distilled_link_probability_product(p0, p_ed):
    """Closed product (2/3)^k P0 prod_j P_ED^(j) / a_ED^(j-1)."""
    p = _check_p(p0, "p0")
    out = p
    for pj in p_ed:
        a = a_constant(p)
        p = (2.0 / 3.0) * pj / a * p
        out *= (2.0 / 3.0) * pj / a
    return out


def deterministic_rate(budget, n, p_l0):
    """Repeater rate 1/(T0 Z_n(P_L0)) for deterministic swapping."""
    return 1.0 / (budget.t0 * zn(n, p_l0))


def probabilistic_rate(budget, n, p_l0, a_ed=(), p_ed=(), p_es=()):
    """Approximate rate for probabilistic swapping via the level-by-level recursion.

    ``<n_i> = <n~_{i-1}> / P_ES^(i)`` and ``<n~_i> = (3/2) a(P_i) <n_i>`` with
    ``P_i = 1/<n_i>``. ``a_ed``/``p_ed`` only annotate the trace; ``p_l0`` must
    already include distillation.
    """
    n = int(n)
    p_l0 = _check_p(p_l0, "p_l0")
    if len(p_es) != n:
        raise DomainError(f"expected {n} swapping probabilities, got {len(p_es)}")
    trace = RateTrace(p0=p_l0, p_ed=list(p_ed), a_ed=list(a_ed), formula="probabilistic")
    if p_l0 > SMALL_P_WARNING:
        trace.warnings.append(
            f"P_L0={p_l0:.3g} > {SMALL_P_WARNING}: small-probability approximation degrades"
        )
    attempts = 1.0 / p_l0
    for i, pes in enumerate(p_es, start=1):
        pes = _check_p(pes, f"p_es[{i}]")
        a = a_constant(1.0 / attempts)
        trace.a_es.append(a)
        trace.p_es.append(pes)
        attempts = 1.5 * a * attempts / pes
    trace.rate_hz = 1.0 / (budget.t0 * attempts)
    return trace


def probabilistic_rate_product(budget, p_l0, a_es, p_es):
    """(1/T0) (2/3)^n P_L0 prod_i P_ES^(i) / a_ES^(i-1) for given constants."""
    r = p_l0 / budget.t0
    for a, pes in zip(a_es, p_es, strict=True):
        r *= (2.0 / 3.0) * pes / a
    return r


def oqr_probabilistic_rate(budget, n, k, eta_d, p_ed_prime):
    """OQR rate with lossy detectors: every ED and ES step needs both detectors to click."""
    eta_d = float(eta_d)
    if not 0.0 < eta_d <= 1.0:
        raise DomainError(f"eta_d={eta_d!r} outside (0, 1]")
    if len(p_ed_prime) != k:
        raise DomainError(f"expected {k} distillation probabilities, got {len(p_ed_prime)}")
    e2 = eta_d * eta_d
    p_ed = [e2 * p for p in p_ed_prime]
    p_l0, a_ed = distilled_link_probability(budget.eta_t, p_ed)
    trace = probabilistic_rate(budget, n, p_l0, a_ed=a_ed, p_ed=p_ed, p_es=[e2] * n)
    trace.p0 = budget.eta_t
    trace.formula = "oqr-probabilistic"
    return trace

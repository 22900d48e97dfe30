"""Hybrid quantum repeater: USD-heralded sources and dissipative controlled-Z gates."""
from dataclasses import dataclass
import math

from .bell import BellDiagonalState, check_probability
from .errors import DegenerateError, DomainError
from .oqr import EdOutcome

__all__ = ["HqrGateParams", "initial_state_hqr", "p_no_flip", "ed_round_hqr", "es_level_hqr", "p0_hqr"]


@dataclass(frozen=True)
class HqrGateParams:
    p_g: float
    p_c: float  # probability that one qubit escapes a Z error
    p_bar: float  # 2 p_c (p_c - 1)

    @classmethod
    def from_p_c(cls, p_c, p_g=float("nan")):
        """Build parameters directly from p_c (handy for tests and ideal gates)."""
        p_c = float(p_c)
        if not 0.5 <= p_c <= 1.0:
            raise DomainError(f"p_c={p_c!r} outside [1/2, 1]")
        return cls(p_g=p_g, p_c=p_c, p_bar=2.0 * p_c * (p_c - 1.0))


def initial_state_hqr(f0):
    f0 = check_probability("f0", float(f0))
    return BellDiagonalState(f0, 1.0 - f0, 0.0, 0.0)


def p_no_flip(p_g):
    """Gate parameters for effective gate quality ``p_g`` in (0, 1]."""
    p_g = float(p_g)
    if not 0.0 < p_g <= 1.0:
        raise DomainError(f"p_g={p_g!r} outside (0, 1]")
    exponent = -math.pi * (1.0 - p_g * p_g) / (2.0 * math.sqrt(p_g) * (1.0 + p_g))
    p_c = 0.5 * (1.0 + math.exp(exponent))
    return HqrGateParams(p_g=p_g, p_c=p_c, p_bar=2.0 * p_c * (p_c - 1.0))


def ed_round_hqr(state, params):
    c1, c2, c3, c4 = state
    pb = params.p_bar
    pb1 = pb + 1.0
    s = 2.0 * c1 + 2.0 * c4 - 1.0
    p_ed = (c1 + c4) ** 2 + (c2 + c3) ** 2 + pb * s * s
    if p_ed <= 1e-15:
        raise DegenerateError("distillation success probability vanished")
    d14 = c1 - c4
    raw = (
        pb * pb * d14 * (d14 + c2 - c3)
        + pb * (c1 * c1 + c4 * c4 + d14 * d14 - c1 * c3 - c2 * c4)
        + c1 * c1 + c4 * c4,
        pb * pb * (c1 * c3 + (c2 - c3 - c4) * c4)
        - pb * (c3 + c4) * c4
        + 2.0 * pb1 * pb1 * c1 * c4
        - pb * pb1 * c1 * (c1 + c2),
        pb * pb * (c1 * c2 + c3 * c4)
        + pb1 * pb1 * (c2 * c2 + c3 * c3)
        - pb * pb1 * (c2 * (c3 + c4) + (c1 + c2) * c3),
        pb * pb * (c2 * c4 + (c1 - c3 - c4) * c3)
        - pb * c3 * (c3 + c4)
        + 2.0 * pb1 * pb1 * c2 * c3
        - pb * pb1 * (c1 + c2) * c2,
    )
    return EdOutcome(BellDiagonalState(*(r / p_ed for r in raw)), p_ed)


def es_level_hqr(state, params):
    """Deterministic swap of two identical pairs through one dissipative gate."""
    c1, c2, c3, c4 = state
    pc = params.p_c
    s2 = (2.0 * c1 + 2.0 * c4 - 1.0) ** 2
    sq = c1 * c1 + c2 * c2 + c3 * c3 + c4 * c4
    x = 2.0 * (c1 - c4) * (c2 - c3)
    return BellDiagonalState(
        2.0 * (c1 * c4 + c2 * c3)
        + 2.0 * pc * (c1 * (1.0 - c1 - 3.0 * c4) - c2 * (c3 - c4) - (c2 - c4) * c3)
        + pc * pc * s2,
        2.0 * (c1 * c3 + c2 * c4) + pc * (s2 + x) - pc * pc * s2,
        2.0 * (c1 * c2 + c3 * c4) + pc * (s2 - x) - pc * pc * s2,
        sq - 2.0 * pc * (sq - (c1 + c4) * (c2 + c3)) + pc * pc * s2,
    )


def p0_hqr(f0, eta_t, eta_d):
    """Probability that the USD measurement heralds an elementary link."""
    f0, eta_t, eta_d = float(f0), float(eta_t), float(eta_d)
    if not 0.5 <= f0 <= 1.0:
        raise DomainError(f"f0={f0!r} outside [0.5, 1]")
    if not 0.0 < eta_t <= 1.0:
        raise DomainError(f"eta_t={eta_t!r} outside (0, 1]")
    if not 0.0 < eta_d <= 1.0:
        raise DomainError(f"eta_d={eta_d!r} outside (0, 1]")
    denom = 1.0 + eta_t * (1.0 - 2.0 * eta_d)
    if denom <= 0.0:
        raise DomainError(f"USD exponent denominator {denom!r} is not positive")
    base = 2.0 * f0 - 1.0
    if base == 0.0:
        return 1.0
    return 0.0 - math.expm1(eta_t * eta_d / denom * math.log(base))

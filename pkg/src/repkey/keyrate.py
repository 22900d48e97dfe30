"""End-to-end secret key rates for the OQR and HQR chains."""
from dataclasses import dataclass, field
import enum
import math

from . import hqr, oqr
from .bell import (
    BellDiagonalState,
    TSIRELSON,
    binary_entropy,
    check_probability,
    di_observables,
    qber_xz,
)
from .errors import DomainError
from .rates import (
    RateTrace,
    deterministic_rate,
    distilled_link_probability,
    link_budget,
    oqr_probabilistic_rate,
)

__all__ = [
    "Setup",
    "RepeaterConfig",
    "HardwareParams",
    "RateRecord",
    "evolve_state",
    "secret_fraction_bb84",
    "secret_fraction_di",
    "key_rates",
]


class Setup(str, enum.Enum):
    OQR = "oqr"
    HQR = "hqr"


@dataclass(frozen=True)
class RepeaterConfig:
    setup: Setup
    l_total: float
    n: int
    k: int
    r_sift: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "setup", Setup(self.setup))
        if self.l_total <= 0:
            raise DomainError(f"total distance L={self.l_total!r} must be positive")
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"nesting level n={self.n!r} must be a non-negative integer")
        if int(self.k) != self.k or self.k < 0:
            raise DomainError(f"distillation rounds k={self.k!r} must be a non-negative integer")
        if not 0.0 < self.r_sift <= 1.0:
            raise DomainError(f"r_sift={self.r_sift!r} outside (0, 1]")

    @property
    def l0(self):
        return self.l_total / 2**self.n


@dataclass(frozen=True)
class HardwareParams:
    p_g: float
    eta_d: float
    f0: float
    alpha: float = 0.17
    c_fiber: float = 2e8

    def __post_init__(self):
        check_probability("p_g", self.p_g)
        check_probability("eta_d", self.eta_d)
        check_probability("f0", self.f0)
        if self.alpha <= 0:
            raise DomainError(f"alpha={self.alpha!r} must be positive")
        if self.c_fiber <= 0:
            raise DomainError(f"c={self.c_fiber!r} must be positive")


@dataclass
class RateRecord:
    state_final: BellDiagonalState
    q_x: float
    q_z: float
    q_z_di: float
    s: float
    r_dd: float
    r_di: float
    rate_rep: float
    key_dd: float
    key_di: float
    trace: RateTrace = field(repr=False, default=None)

    @property
    def f_final(self):
        return self.state_final.c1


def _models(setup, p_g):
    if setup is Setup.OQR:
        return oqr.initial_state_oqr, lambda st: oqr.ed_round_oqr(st, p_g), lambda st: oqr.es_level_oqr(st, p_g)
    params = hqr.p_no_flip(p_g)
    return (
        hqr.initial_state_hqr,
        lambda st: hqr.ed_round_hqr(st, params),
        lambda st: hqr.es_level_hqr(st, params),
    )


def evolve_state(config, hw):
    """Distil ``k`` times at the elementary level, then swap through ``n`` levels.

    Returns the final state and the gate-only distillation success probabilities.
    """
    init, ed, es = _models(config.setup, hw.p_g)
    state = init(hw.f0)
    p_ed = []
    for _ in range(config.k):
        res = ed(state)
        state = res.state
        p_ed.append(res.p_success)
    for _ in range(config.n):
        state = es(state)
    return state, p_ed


def secret_fraction_bb84(q_x, q_z):
    return max(0.0, 1.0 - binary_entropy(q_z) - binary_entropy(q_x))


def secret_fraction_di(q, s):
    """Lower bound on the DI secret fraction; zero unless the CHSH value exceeds 2."""
    if abs(s) > TSIRELSON + 1e-9:
        raise DomainError(f"CHSH value s={s!r} exceeds the Tsirelson bound")
    if s <= 2.0:
        return 0.0
    root = math.sqrt(max(s * s / 4.0 - 1.0, 0.0))
    return max(0.0, 1.0 - binary_entropy(q) - binary_entropy(min((1.0 + root) / 2.0, 1.0)))


def _repeater_rate(config, hw, p_ed_prime):
    budget = link_budget(config.l0, hw.alpha, hw.c_fiber)
    if config.setup is Setup.HQR:
        p0 = hqr.p0_hqr(hw.f0, budget.eta_t, hw.eta_d)
        if p0 == 0.0:
            return RateTrace(p0=0.0, p_ed=list(p_ed_prime), rate_hz=0.0, formula="deterministic")
        p_l0, a_ed = distilled_link_probability(p0, p_ed_prime)
        trace = RateTrace(p0=p0, p_ed=list(p_ed_prime), a_ed=a_ed, p_es=[1.0] * config.n,
                          formula="deterministic")
    elif hw.eta_d == 1.0:
        p_l0, a_ed = distilled_link_probability(budget.eta_t, p_ed_prime)
        trace = RateTrace(p0=budget.eta_t, p_ed=list(p_ed_prime), a_ed=a_ed,
                          p_es=[1.0] * config.n, formula="deterministic")
    else:
        return oqr_probabilistic_rate(budget, config.n, config.k, hw.eta_d, p_ed_prime)
    trace.rate_hz = deterministic_rate(budget, config.n, p_l0)
    return trace


def key_rates(config, hw):
    """Evolve the chain and assemble DD and DI secret fractions and key rates."""
    state, p_ed_prime = evolve_state(config, hw)
    q_x, q_z = qber_xz(state)
    di = di_observables(state, hw.eta_d)
    r_dd = secret_fraction_bb84(q_x, q_z)
    r_di = secret_fraction_di(di.q_z, di.s)
    trace = _repeater_rate(config, hw, p_ed_prime)
    rate = trace.rate_hz
    p_click = hw.eta_d * hw.eta_d
    return RateRecord(
        state_final=state,
        q_x=q_x,
        q_z=q_z,
        q_z_di=di.q_z,
        s=di.s,
        r_dd=r_dd,
        r_di=r_di,
        rate_rep=rate,
        key_dd=rate * config.r_sift * p_click * r_dd,
        key_di=rate * r_di,
        trace=trace,
    )

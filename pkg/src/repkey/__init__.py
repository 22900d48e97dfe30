"""Device-dependent and device-independent key rates of nested quantum repeaters."""
from .bell import (
    BellDiagonalState,
    DiObservables,
    apply_detector_noise,
    binary_entropy,
    di_observables,
    qber_xz,
)
from .errors import DegenerateError, DomainError, InvariantError
from .hqr import HqrGateParams, ed_round_hqr, es_level_hqr, initial_state_hqr, p0_hqr, p_no_flip
from .keyrate import (
    HardwareParams,
    RateRecord,
    RepeaterConfig,
    Setup,
    evolve_state,
    key_rates,
    secret_fraction_bb84,
    secret_fraction_di,
)
from .oqr import EdOutcome, ed_round_oqr, es_level_oqr, es_success_oqr, initial_state_oqr
from .rates import (
    LinkBudget,
    RateTrace,
    a_constant,
    deterministic_rate,
    distilled_link_probability,
    link_budget,
    oqr_probabilistic_rate,
    probabilistic_rate,
    transmittivity,
    zn,
)

__version__ = "0.1.0"

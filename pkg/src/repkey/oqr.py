"""Original quantum repeater: Werner sources and depolarizing two-qubit gates.

The closed-form coefficient maps below assume a homogeneous chain, i.e. both
inputs of every distillation or swapping step carry identical coefficients.
"""
from dataclasses import dataclass

from .bell import BellDiagonalState, check_probability
from .errors import DegenerateError, DomainError

__all__ = ["EdOutcome", "initial_state_oqr", "ed_round_oqr", "es_level_oqr", "es_success_oqr"]


@dataclass(frozen=True)
class EdOutcome:
    state: BellDiagonalState
    p_success: float  # gate-only success probability, detector factors excluded


def initial_state_oqr(f0):
    f0 = float(f0)
    if not 0.25 <= f0 <= 1.0:
        raise DomainError(f"f0={f0!r} outside [0.25, 1] for a Werner source")
    r = (1.0 - f0) / 3.0
    return BellDiagonalState(f0, r, r, r)


def ed_round_oqr(state, p_g):
    """One Deutsch distillation round with two depolarizing CNOTs."""
    p_g = check_probability("p_g", float(p_g))
    c1, c2, c3, c4 = state
    p2 = p_g * p_g
    s = 2.0 * c1 + 2.0 * c4 - 1.0
    p_ed = 0.5 * (1.0 + p2 * s * s)
    if p_ed <= 1e-15:
        raise DegenerateError("distillation success probability vanished")
    norm = 8.0 * p_ed
    out = (
        (1.0 + p2 * (8.0 * c1 * c1 + 8.0 * c4 * c4 - 1.0)) / norm,
        (1.0 - p2 * (1.0 - 16.0 * c1 * c4)) / norm,
        (1.0 + p2 * (8.0 * c2 * c2 + 8.0 * c3 * c3 - 1.0)) / norm,
        (1.0 - p2 * (1.0 - 16.0 * c2 * c3)) / norm,
    )
    return EdOutcome(BellDiagonalState(*out), p_ed)


def es_level_oqr(state, p_g):
    """Swap two identical pairs through one depolarizing CNOT."""
    p_g = check_probability("p_g", float(p_g))
    c1, c2, c3, c4 = state
    w = (1.0 - p_g) / 4.0
    return BellDiagonalState(
        w + p_g * (c1 * c1 + c2 * c2 + c3 * c3 + c4 * c4),
        w + 2.0 * p_g * (c1 * c2 + c3 * c4),
        w + 2.0 * p_g * (c1 * c3 + c2 * c4),
        w + 2.0 * p_g * (c1 * c4 + c2 * c3),
    )


def es_success_oqr(eta_d):
    """Both detectors of the Bell measurement must click."""
    eta_d = check_probability("eta_d", float(eta_d))
    return eta_d * eta_d

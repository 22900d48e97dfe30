"""Bell-diagonal two-qubit states and the QKD observables derived from them.

Coefficients are always ordered as (phi1, phi2, phi3, phi4) with

    phi1,2 = (|00> +- |11>)/sqrt2,    phi3,4 = (|01> +- |10>)/sqrt2.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError

__all__ = [
    "BellDiagonalState",
    "DiObservables",
    "binary_entropy",
    "qber_xz",
    "apply_detector_noise",
    "di_observables",
    "chsh_value",
    "TSIRELSON",
]

TSIRELSON = 2.0 * math.sqrt(2.0)
CLAMP_TOL = 1e-12
NORM_TOL = 1e-9


def check_probability(name, value, tol=0.0):
    if not (-tol <= value <= 1.0 + tol) or math.isnan(value):
        raise DomainError(f"{name}={value!r} outside [0, 1]")
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class BellDiagonalState:
    """Weights of the four Bell states for one entangled pair."""

    c1: float
    c2: float
    c3: float
    c4: float

    def __post_init__(self):
        coeffs = []
        for i, c in enumerate((self.c1, self.c2, self.c3, self.c4), start=1):
            c = float(c)
            if math.isnan(c) or c < -CLAMP_TOL:
                raise DomainError(f"Bell coefficient c{i}={c!r} is negative")
            coeffs.append(max(c, 0.0))
        if abs(math.fsum(coeffs) - 1.0) > NORM_TOL:
            raise DomainError(f"Bell coefficients sum to {math.fsum(coeffs)!r}, not 1")
        for name, c in zip(("c1", "c2", "c3", "c4"), coeffs):
            object.__setattr__(self, name, c)

    @classmethod
    def from_array(cls, coeffs):
        c = np.asarray(coeffs, dtype=float).reshape(4)
        return cls(*c.tolist())

    @classmethod
    def from_unnormalized(cls, coeffs):
        """Rescale non-negative weights to unit sum."""
        c = [float(x) for x in coeffs]
        total = math.fsum(c)
        return cls(*(x / total for x in c))

    def as_array(self):
        return np.array([self.c1, self.c2, self.c3, self.c4])

    def __iter__(self):
        return iter((self.c1, self.c2, self.c3, self.c4))

    @property
    def fidelity(self):
        return self.c1


@dataclass(frozen=True)
class DiObservables:
    q_z: float
    s: float


def binary_entropy(p):
    """h(p) = -p log2 p - (1-p) log2 (1-p), with h(0) = h(1) = 0."""
    p = check_probability("p", float(p), tol=1e-12)
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def qber_xz(state):
    """Return (Q_x, Q_z) of a Bell-diagonal state."""
    return state.c2 + state.c4, state.c3 + state.c4


def apply_detector_noise(state, eta_d):
    """Mix in the white noise caused by randomly assigning no-click events."""
    eta_d = check_probability("eta_d", float(eta_d))
    e2 = eta_d * eta_d
    w = (1.0 - e2) / 4.0
    return BellDiagonalState(*(e2 * c + w for c in state))


def chsh_value(state):
    return TSIRELSON * (state.c1 - state.c4)


def di_observables(state, eta_d):
    """QBER in the key basis and CHSH value seen by the DI protocol."""
    eta_d = check_probability("eta_d", float(eta_d))
    e2 = eta_d * eta_d
    q_z = e2 * (state.c3 + state.c4) + (1.0 - e2) / 2.0
    s = TSIRELSON * e2 * (state.c1 - state.c4)
    return DiObservables(q_z=q_z, s=s)

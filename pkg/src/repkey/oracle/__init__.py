"""Independent ground truth: explicit density matrices and Monte Carlo waiting times."""
from .density import (
    DensityMatrix,
    bell_projector,
    bell_state_matrix,
    bell_coefficients,
    apply_depolarizing_gate,
    apply_dissipative_gate,
    ed_oracle,
    es_oracle,
    chsh_oracle,
    marginals,
)
from .montecarlo import McEstimate, mc_repeater

__all__ = [
    "DensityMatrix",
    "bell_projector",
    "bell_state_matrix",
    "bell_coefficients",
    "apply_depolarizing_gate",
    "apply_dissipative_gate",
    "ed_oracle",
    "es_oracle",
    "chsh_oracle",
    "marginals",
    "McEstimate",
    "mc_repeater",
]

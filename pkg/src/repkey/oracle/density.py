"""Explicit density-matrix simulation of the distillation and swapping circuits.

Basis ordering is |00>, |01>, |10>, |11> with qubit 0 the most significant bit.
The distillation register is (a1, b1, a2, b2) and the swapping register is
(a, b, c, d); in both cases the input is the Kronecker product of two pairs.

Nothing here imports the closed-form coefficient maps, so agreement between
the two is a genuine cross-check.
"""
from dataclasses import dataclass
from functools import reduce
import itertools
import math

import numpy as np

from ..errors import DegenerateError, DomainError, InvariantError

__all__ = [
    "DensityMatrix",
    "GateModel",
    "IDEAL",
    "depolarizing",
    "dissipative",
    "bell_projector",
    "bell_state_matrix",
    "bell_coefficients",
    "apply_depolarizing_gate",
    "apply_dissipative_gate",
    "ed_oracle",
    "es_oracle",
    "chsh_oracle",
    "marginals",
]

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
PAULIS = (I2, X, Y, Z)

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)

_S = 1.0 / math.sqrt(2.0)
BELL_VECTORS = np.array(
    [
        [_S, 0, 0, _S],
        [_S, 0, 0, -_S],
        [0, _S, _S, 0],
        [0, _S, -_S, 0],
    ],
    dtype=complex,
)


def rx(theta):
    return math.cos(theta / 2) * I2 - 1j * math.sin(theta / 2) * X


@dataclass(frozen=True)
class DensityMatrix:
    """A validated density matrix on two (dim 4) or four (dim 16) qubits."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape not in ((4, 4), (16, 16)):
            raise DomainError(f"density matrix must be 4x4 or 16x16, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise InvariantError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > 1e-12:
            raise InvariantError(f"density matrix has trace {np.trace(m).real!r}")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise InvariantError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self):
        return self.entries.shape[0]


def _matrix(rho):
    return rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _nqubits(m):
    nq = int(round(math.log2(m.shape[0])))
    if m.shape != (2**nq, 2**nq):
        raise DomainError(f"not a qubit register: shape {m.shape}")
    return nq


def embed(op, qubits, nq):
    """Lift ``op`` acting on ``qubits`` (in that order) to the full register."""
    k = len(qubits)
    if op.shape != (2**k, 2**k) or len(set(qubits)) != k or max(qubits) >= nq:
        raise DomainError(f"cannot place a {op.shape} operator on qubits {qubits}")
    rest = [q for q in range(nq) if q not in qubits]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex))
    order = list(qubits) + rest
    inv = np.argsort(order)
    t = full.reshape([2] * (2 * nq))
    t = t.transpose(list(inv) + [nq + i for i in inv])
    return t.reshape(2**nq, 2**nq)


def _conj(rho, op):
    return op @ rho @ op.conj().T


def partial_trace(rho, keep):
    nq = _nqubits(rho)
    t = rho.reshape([2] * (2 * nq))
    drop = [q for q in range(nq) if q not in keep]
    for offset, q in enumerate(sorted(drop)):
        ax = q - offset
        t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
    d = 2 ** len(keep)
    return t.reshape(d, d)


@dataclass(frozen=True)
class GateModel:
    kind: str  # "ideal", "depolarizing" or "dissipative"
    param: float = 1.0


IDEAL = GateModel("ideal")


def depolarizing(p_g):
    return GateModel("depolarizing", float(p_g))


def dissipative(p_c):
    return GateModel("dissipative", float(p_c))


def apply_depolarizing_gate(chi, p_g, ideal_gate, qubits=(0, 1)):
    """p_g U chi U^dag + (1 - p_g) (1/4 on the gate qubits) (x) Tr_gate(chi)."""
    m = _matrix(chi)
    nq = _nqubits(m)
    if not 0.0 <= p_g <= 1.0:
        raise DomainError(f"p_g={p_g!r} outside [0, 1]")
    out = p_g * _conj(m, embed(ideal_gate, qubits, nq))
    if p_g < 1.0:
        # two-qubit Pauli twirl = full depolarization of the gate qubits
        twirl = sum(
            _conj(m, embed(np.kron(pa, pb), qubits, nq))
            for pa, pb in itertools.product(PAULIS, PAULIS)
        )
        out = out + (1.0 - p_g) / 16.0 * twirl
    return out


def apply_dissipative_gate(chi, p_c, qubits=(0, 1)):
    """Independent Z flips (each with probability 1 - p_c), then an ideal CZ."""
    m = _matrix(chi)
    nq = _nqubits(m)
    if not 0.5 <= p_c <= 1.0:
        raise DomainError(f"p_c={p_c!r} outside [1/2, 1]")
    za = embed(Z, (qubits[0],), nq)
    zb = embed(Z, (qubits[1],), nq)
    q = 1.0 - p_c
    mixed = (
        p_c * p_c * m
        + q * q * _conj(m, za @ zb)
        + p_c * q * (_conj(m, za) + _conj(m, zb))
    )
    return _conj(mixed, embed(CZ, qubits, nq))


def apply_cnot(m, control, target, model):
    nq = _nqubits(m)
    if model.kind == "ideal":
        return _conj(m, embed(CNOT, (control, target), nq))
    if model.kind == "depolarizing":
        return apply_depolarizing_gate(m, model.param, CNOT, (control, target))
    if model.kind == "dissipative":
        # CNOT = H_t CZ H_t; the Z errors act between the Hadamards
        ht = embed(H, (target,), nq)
        m = _conj(m, ht)
        m = apply_dissipative_gate(m, model.param, (control, target))
        return _conj(m, ht)
    raise DomainError(f"unknown gate model {model.kind!r}")


def bell_projector(i):
    """|phi_i><phi_i| for i in 1..4."""
    if i not in (1, 2, 3, 4):
        raise IndexError(f"Bell index {i!r} not in 1..4")
    v = BELL_VECTORS[i - 1]
    return np.outer(v, v.conj())


def bell_state_matrix(coeffs):
    """Density matrix of the Bell-diagonal state with the given weights."""
    return sum(c * bell_projector(i) for i, c in enumerate(coeffs, start=1))


def bell_coefficients(rho):
    """Return (Tr[P_i rho] for i = 1..4, norm of the non-Bell-diagonal residual)."""
    m = _matrix(rho)
    c = np.array([np.trace(bell_projector(i) @ m).real for i in range(1, 5)])
    residual = np.max(np.abs(m - bell_state_matrix(c)))
    return c, residual


def ed_oracle(rho_pair, model=IDEAL):
    """Run the two-copy distillation circuit; return (surviving pair, success probability)."""
    m = _matrix(rho_pair)
    if m.shape != (4, 4):
        raise DomainError("distillation input must be a single pair (4x4)")
    rho = np.kron(m, m)  # qubits a1 b1 a2 b2
    rot = reduce(np.kron, (rx(math.pi / 2), rx(-math.pi / 2), rx(math.pi / 2), rx(-math.pi / 2)))
    rho = _conj(rho, rot)
    rho = apply_cnot(rho, 0, 2, model)
    rho = apply_cnot(rho, 1, 3, model)
    keep = np.kron(np.eye(4), np.diag([1.0, 0.0, 0.0, 1.0]))
    rho = keep @ rho @ keep
    p = np.trace(rho).real
    if p < 1e-15:
        raise DegenerateError("distillation projection probability vanished")
    return partial_trace(rho, (0, 1)) / p, p


def es_oracle(rho_a, rho_b, model=IDEAL):
    """Swap pairs (a, b) and (c, d) into an (a, d) pair, averaged over outcomes."""
    ma, mb = _matrix(rho_a), _matrix(rho_b)
    if ma.shape != (4, 4) or mb.shape != (4, 4):
        raise DomainError("swapping inputs must be single pairs (4x4)")
    rho = apply_cnot(np.kron(ma, mb), 1, 2, model)
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / math.sqrt(2.0)
    zero, one = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    out = np.zeros((4, 4), dtype=complex)
    for mb_bit, vb in enumerate((plus, minus)):
        for mc_bit, vc in enumerate((zero, one)):
            proj = embed(np.outer(np.kron(vb, vc), np.kron(vb, vc)).astype(complex), (1, 2), 4)
            fix = np.linalg.matrix_power(Z, mb_bit) @ np.linalg.matrix_power(X, mc_bit)
            k = embed(fix, (3,), 4) @ proj
            out += partial_trace(_conj(rho, k), (0, 3))
    return out


def chsh_oracle(rho):
    """CHSH value Tr[rho sum_ij (-1)^(ij) A_i (x) B_j]."""
    m = _matrix(rho)
    a = ((X + Z) / math.sqrt(2.0), (X - Z) / math.sqrt(2.0))
    b = (X, Z)
    op = sum((-1) ** (i * j) * np.kron(a[i], b[j]) for i in (0, 1) for j in (0, 1))
    return float(np.trace(m @ op).real)


def marginals(rho):
    """Single-party expectation values <A_i (x) 1> (i = 0, 1, 2) and <1 (x) B_j> (j = 0, 1)."""
    m = _matrix(rho)
    alice = ((X + Z) / math.sqrt(2.0), (X - Z) / math.sqrt(2.0), Z)
    bob = (X, Z)
    ea = [np.trace(m @ np.kron(op, I2)).real for op in alice]
    eb = [np.trace(m @ np.kron(I2, op)).real for op in bob]
    return np.array(ea), np.array(eb)

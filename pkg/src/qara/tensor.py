"""Dense real operators and state vectors over qubit registers.

Index convention is little-endian: qubit ``q`` carries weight ``2**q`` in the
basis-state index, so the most significant qubit of an ``n``-qubit operator
selects the top/bottom half of the matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_DENSE_QUBITS = 14
ORTHOGONAL_TOL = 1e-12
NORM_TOL = 1e-10


class DimensionError(ValueError):
    pass


def _num_qubits_for(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 2 or 1 << n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two >= 2")
    return n


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Square real matrix acting on ``num_qubits`` qubits.

    Entries are copied and made read-only on construction.
    """

    num_qubits: int
    entries: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 1 or self.num_qubits > MAX_DENSE_QUBITS:
            raise DimensionError(
                f"dense operators support 1..{MAX_DENSE_QUBITS} qubits, got {self.num_qubits}"
            )
        mat = np.array(self.entries, dtype=np.float64)
        dim = 1 << self.num_qubits
        if mat.shape != (dim, dim):
            raise DimensionError(f"expected {dim}x{dim} entries, got {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)

    @classmethod
    def from_matrix(cls, matrix) -> DenseOperator:
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(_num_qubits_for(matrix.shape[0]), matrix)

    @classmethod
    def identity(cls, num_qubits: int) -> DenseOperator:
        if not 1 <= num_qubits <= MAX_DENSE_QUBITS:
            raise DimensionError(f"dense operators support 1..{MAX_DENSE_QUBITS} qubits")
        return cls(num_qubits, np.eye(1 << num_qubits))

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    @property
    def T(self) -> DenseOperator:
        return DenseOperator(self.num_qubits, self.entries.T)

    def is_orthogonal(self, tol: float = ORTHOGONAL_TOL) -> bool:
        m = self.entries
        return float(np.max(np.abs(m.T @ m - np.eye(self.dim)))) <= tol

    def __matmul__(self, other: DenseOperator) -> DenseOperator:
        return mat_mul(self, other)

    def __repr__(self) -> str:
        return f"DenseOperator(num_qubits={self.num_qubits})"


@dataclass(frozen=True, eq=False)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.float64)
        if amps.shape != (1 << self.num_qubits,):
            raise DimensionError(
                f"expected {1 << self.num_qubits} amplitudes, got shape {amps.shape}"
            )
        norm = float(amps @ amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (sum of squares {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> StateVector:
        amps = np.zeros(1 << num_qubits)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    def probabilities(self) -> np.ndarray:
        return self.amplitudes**2


def mat_mul(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    if a.num_qubits != b.num_qubits:
        raise DimensionError(
            f"cannot multiply {a.num_qubits}-qubit and {b.num_qubits}-qubit operators"
        )
    return DenseOperator(a.num_qubits, a.entries @ b.entries)


def kron(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    """Kronecker product; ``a`` occupies the high qubits of the result."""
    return DenseOperator(a.num_qubits + b.num_qubits, np.kron(a.entries, b.entries))


def approx_equal(a: DenseOperator, b: DenseOperator, tol: float) -> bool:
    if a.num_qubits != b.num_qubits:
        raise DimensionError(
            f"cannot compare {a.num_qubits}-qubit and {b.num_qubits}-qubit operators"
        )
    return float(np.max(np.abs(a.entries - b.entries))) <= tol


def apply(op: DenseOperator, state: StateVector) -> StateVector:
    if op.num_qubits != state.num_qubits:
        raise DimensionError("operator and state sizes differ")
    return StateVector(state.num_qubits, op.entries @ state.amplitudes)

"""The amplitude redistribution operator R_n(phi) and its gate decomposition.

R_n(phi) is the real orthogonal 2^n x 2^n matrix with cos(phi/2) on the
diagonal and off-diagonal entries of magnitude sin(phi/2)/sqrt(2^n - 1).  The
off-diagonal signs follow a recursive layout::

    R_1 = [[c, -s],       R_{n+1} = [[A_n, -B_n],
           [s,  c]]                  [B_n,  A_n]]

where A_n carries the signs of R_n and B_n the signs of the Walsh-Hadamard
matrix H_n.  Three constructions are provided: the recursive block form,
a closed form ``cos I + sin S / sqrt(2^n - 1)`` with a fixed antisymmetric
sign matrix S, and a list of elementary gates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from qara.tensor import MAX_DENSE_QUBITS, DenseOperator

MAX_ROTATION_QUBITS = 12
MAX_LEMMA_QUBITS = 8

RY = "RY"
HADAMARD = "H"
NOT = "X"
GATE_KINDS = (RY, HADAMARD, NOT)

_H1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def _check_range(name: str, n: int, hi: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1 or n > hi:
        raise ValueError(f"{name} requires 1 <= n <= {hi}, got {n!r}")


def hadamard_n(n: int) -> DenseOperator:
    """n-fold Kronecker power of the single-qubit Hadamard."""
    _check_range("hadamard_n", n, MAX_DENSE_QUBITS)
    return DenseOperator(n, _hadamard_matrix(n))


def _hadamard_matrix(n: int) -> np.ndarray:
    mat = np.ones((1, 1))
    for _ in range(n):
        mat = np.kron(mat, _H1)
    return mat


@lru_cache(maxsize=None)
def sign_pattern(n: int) -> np.ndarray:
    """Antisymmetric +-1 matrix (zero diagonal) holding the off-diagonal signs of R_n.

    Satisfies ``S @ S == -(2^n - 1) I``, which is what makes
    ``cos(t) I + sin(t) S / sqrt(2^n - 1)`` orthogonal for every t.
    """
    _check_range("sign_pattern", n, MAX_DENSE_QUBITS)
    s = np.array([[0, -1], [1, 0]], dtype=np.int8)
    for k in range(1, n):
        dim = 1 << k
        idx = np.arange(dim)
        hsign = np.where(_popcount(idx[:, None] & idx[None, :]) % 2 == 0, 1, -1).astype(np.int8)
        s = np.block([[s, -hsign], [hsign, s]])
    s.setflags(write=False)
    return s


def _popcount(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.int64)
    count = np.zeros_like(arr)
    while np.any(arr):
        count += arr & 1
        arr = arr >> 1
    return count


def _recursive_matrix(n: int, phi: float) -> np.ndarray:
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    if n == 1:
        return np.array([[c, -s], [s, c]])
    k = n - 1
    a = math.sqrt((1 << k) / ((1 << n) - 1)) * s
    b = math.sqrt(1.0 - a * a)
    # inner angle: b*cos(phi'/2) = cos(phi/2), and the off-diagonals then
    # come out as b*sin(phi'/2)/sqrt(2^k-1) = sin(phi/2)/sqrt(2^n-1)
    inner = 2.0 * math.atan2(s * math.sqrt(((1 << k) - 1) / ((1 << n) - 1)), c)
    blk_a = b * _recursive_matrix(k, inner)
    blk_b = a * _hadamard_matrix(k)
    return np.block([[blk_a, -blk_b], [blk_b, blk_a]])


def _closed_matrix(n: int, phi: float) -> np.ndarray:
    dim = 1 << n
    return math.cos(phi / 2) * np.eye(dim) + (
        math.sin(phi / 2) / math.sqrt(dim - 1)
    ) * sign_pattern(n)


def dense_rotation(n: int, phi: float, method: str = "recursive") -> DenseOperator:
    """Dense R_n(phi).

    ``method="recursive"`` builds the block recursion, solving for the inner
    angle at each level; ``method="closed"`` uses the sign matrix directly.
    """
    _check_range("dense_rotation", n, MAX_ROTATION_QUBITS)
    if method == "recursive":
        mat = _recursive_matrix(n, float(phi))
    elif method == "closed":
        mat = _closed_matrix(n, float(phi))
    else:
        raise ValueError(f"unknown construction method {method!r}")
    return DenseOperator(n, mat)


def rotation_column(n: int, phi: float, j: int) -> np.ndarray:
    """Column ``j`` of R_n(phi), i.e. the image of basis vector e_j, in O(2^n)."""
    dim = 1 << n
    col = (math.sin(phi / 2) / math.sqrt(dim - 1)) * sign_pattern(n)[:, j].astype(np.float64)
    col[j] = math.cos(phi / 2)
    return col


def psi_angle(k: int) -> float:
    """Angle of the inner operator R_k(psi) used by the decomposition.

    R_k(psi) has diagonal sqrt(2^k / (2^{k+1} - 1)) and off-diagonal
    magnitude 1/sqrt(2^{k+1} - 1).
    """
    return 2.0 * math.atan2(math.sqrt((1 << k) - 1), math.sqrt(1 << k))


@dataclass(frozen=True)
class GateOp:
    """Elementary gate: RY(angle), HADAMARD or NOT on ``target``.

    ``controls`` holds ``(qubit, on_one)`` pairs; ``on_one=False`` marks a
    control that fires on |0>.
    """

    kind: str
    target: int
    controls: tuple = ()
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if (self.angle is not None) != (self.kind == RY):
            raise ValueError("angle is required for RY and forbidden otherwise")
        controls = tuple((int(q), bool(pol)) for q, pol in self.controls)
        qubits = [q for q, _ in controls]
        if self.target in qubits:
            raise ValueError(f"target {self.target} is also a control")
        if len(set(qubits)) != len(qubits):
            raise ValueError("duplicate control qubit")
        if self.target < 0 or any(q < 0 for q in qubits):
            raise ValueError("negative qubit index")
        object.__setattr__(self, "controls", controls)

    @property
    def qubits(self) -> tuple:
        return (self.target, *(q for q, _ in self.controls))

    def matrix(self) -> np.ndarray:
        if self.kind == RY:
            c, s = math.cos(self.angle / 2), math.sin(self.angle / 2)
            return np.array([[c, -s], [s, c]])
        return _H1 if self.kind == HADAMARD else _X

    def inverse(self) -> GateOp:
        if self.kind == RY:
            return GateOp(RY, self.target, self.controls, -self.angle)
        return self

    def with_controls(self, extra: Sequence) -> GateOp:
        return GateOp(self.kind, self.target, self.controls + tuple(extra), self.angle)


@dataclass(frozen=True)
class GateList:
    """Ordered gate sequence; index 0 acts on the state first."""

    register_size: int
    gates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        gates = tuple(self.gates)
        for g in gates:
            if max(g.qubits) >= self.register_size:
                raise ValueError(f"{g} exceeds register of {self.register_size} qubits")
        object.__setattr__(self, "gates", gates)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self) -> Iterator[GateOp]:
        return iter(self.gates)

    def inverse(self) -> GateList:
        return GateList(self.register_size, tuple(g.inverse() for g in reversed(self.gates)))

    def apply_to(self, amplitudes: np.ndarray) -> np.ndarray:
        """Apply every gate to a state over ``register_size`` qubits (returns a new array)."""
        psi = np.array(amplitudes, dtype=np.float64)
        for g in self.gates:
            apply_gate(psi, g, self.register_size)
        return psi

    def to_dense(self) -> DenseOperator:
        """Evaluate as a dense operator by pushing every basis column through the gates."""
        if self.register_size > MAX_DENSE_QUBITS:
            raise ValueError("register too large for dense evaluation")
        dim = 1 << self.register_size
        mat = np.eye(dim)
        for g in self.gates:
            apply_gate(mat, g, self.register_size)
        return DenseOperator(self.register_size, mat)


def apply_gate(psi: np.ndarray, gate: GateOp, num_qubits: int) -> None:
    """Apply ``gate`` in place.  ``psi`` has 2^num_qubits rows; extra trailing
    axes (e.g. a batch of columns) are carried along."""
    view = psi.reshape((2,) * num_qubits + psi.shape[1:])
    idx = [slice(None)] * view.ndim
    for q, on_one in gate.controls:
        idx[num_qubits - 1 - q] = 1 if on_one else 0
    axis = num_qubits - 1 - gate.target
    idx0, idx1 = list(idx), list(idx)
    idx0[axis], idx1[axis] = 0, 1
    idx0, idx1 = tuple(idx0), tuple(idx1)
    u = gate.matrix()
    v0 = view[idx0].copy()
    v1 = view[idx1]
    view[idx0] = u[0, 0] * v0 + u[0, 1] * v1
    view[idx1] = u[1, 0] * v0 + u[1, 1] * v1


def decompose_rotation(n: int, phi: float) -> GateList:
    """Elementary-gate circuit for R_n(phi) on qubits 0..n-1.

    Basis-change ladder (each qubit from the top down controls Hadamards on
    every lower qubit, then takes RY(pi/2)), a chain of controlled RY(-psi_k),
    the central RY(phi) on the top qubit, then the mirror image.  The
    intermediate basis transitions of the naive recursion cancel, leaving
    n^2 + 3n - 3 gates.
    """
    if n < 1:
        raise ValueError(f"decompose_rotation requires n >= 1, got {n}")
    top = n - 1
    ladder: list[GateOp] = []
    for ctrl in range(top, 0, -1):
        ladder.extend(GateOp(HADAMARD, t, ((ctrl, True),)) for t in range(ctrl - 1, -1, -1))
        ladder.append(GateOp(RY, ctrl, (), math.pi / 2))
    chain = [GateOp(RY, k - 1, ((k, True),), -psi_angle(k)) for k in range(1, n)]
    core = chain + [GateOp(RY, top, (), float(phi))] + [g.inverse() for g in reversed(chain)]
    gates = ladder + core + [g.inverse() for g in reversed(ladder)]
    return GateList(n, tuple(gates))


def controlled(gates: GateList, extra_controls: Iterable) -> GateList:
    """Add ``extra_controls`` (``(qubit, on_one)`` pairs) to every gate.

    Control qubits must not be touched by any gate in ``gates``; the register
    grows to cover them.
    """
    extra = tuple((int(q), bool(pol)) for q, pol in extra_controls)
    used = {q for g in gates for q in g.qubits}
    clash = sorted(used & {q for q, _ in extra})
    if clash:
        raise ValueError(f"control qubits {clash} overlap the gate list's register")
    size = max([gates.register_size] + [q + 1 for q, _ in extra])
    return GateList(size, tuple(g.with_controls(extra) for g in gates))


def relabel(gates: GateList, mapping: Sequence[int], register_size: int) -> GateList:
    """Move qubit ``q`` of ``gates`` to ``mapping[q]`` in a register of ``register_size``."""
    out = []
    for g in gates:
        ctrls = tuple((mapping[q], pol) for q, pol in g.controls)
        out.append(GateOp(g.kind, mapping[g.target], ctrls, g.angle))
    return GateList(register_size, tuple(out))


def _asap_depth(steps: list[set]) -> int:
    ready: dict[int, int] = {}
    depth = 0
    for qubits in steps:
        layer = 1 + max((ready.get(q, 0) for q in qubits), default=0)
        for q in qubits:
            ready[q] = layer
        depth = max(depth, layer)
    return depth


def gate_metrics(n: int) -> tuple[int, int, int]:
    """(gate_count, serial_depth, parallel_depth) of ``decompose_rotation(n, .)``.

    Both depths are ASAP layer counts.  ``parallel_depth`` additionally lets a
    run of Hadamards that share one control qubit execute in a single step.
    """
    gates = decompose_rotation(n, 1.0).gates
    serial = _asap_depth([set(g.qubits) for g in gates])
    steps: list[set] = []
    prev = None
    for g in gates:
        key = (g.kind, g.controls) if g.kind == HADAMARD and g.controls else None
        if key is not None and key == prev and g.target not in steps[-1]:
            steps[-1].add(g.target)
        else:
            steps.append(set(g.qubits))
        prev = key
    return len(gates), serial, _asap_depth(steps)


def verify_lemma_hrh(n: int, phi: float, tol: float = 1e-11) -> bool:
    """Check H_n R_n(phi) H_n == R_n(phi)^T entrywise within ``tol``."""
    _check_range("verify_lemma_hrh", n, MAX_LEMMA_QUBITS)
    h = _hadamard_matrix(n)
    r = dense_rotation(n, phi).entries
    return float(np.max(np.abs(h @ r @ h - r.T))) <= tol

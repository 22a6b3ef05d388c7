"""Quantum amplitude redistribution on a window of integers.

A window of M = 2^m integers is loaded into a data register entangled with a
counter register in uniform superposition.  For each data bit i a rotation
R_m(+phi_i) is applied to the counter when the reference bit is set and
R_m(-phi_i) when the data bit is set.  Branch j therefore receives a net
rotation whose half-angle is

    theta_j = pi * (r - d_j) / 2^(n+1)

and measuring the counter favours indices whose value is close to ``r``.

Three backends compute the counter distribution: a full statevector
simulation of the circuit, a per-branch O(M^2) computation and the closed
form.  The reference register is classical, so rotations it controls are
inserted conditionally instead of being simulated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from qara.rotation import (
    GateList,
    GateOp,
    HADAMARD,
    NOT,
    controlled,
    decompose_rotation,
    dense_rotation,
    relabel,
    rotation_column,
)

MAX_STATEVECTOR_QUBITS = 22
PROB_TOL = 1e-10
ANGLE_TOL = 1e-14


class DistinctnessError(ValueError):
    """The closed form and the branch backend need pairwise distinct data words."""


@dataclass(frozen=True)
class RegisterGeometry:
    M: int
    m: int
    n: int
    unique_mode: bool

    def __post_init__(self):
        if self.M < 2 or self.M != 1 << self.m:
            raise ValueError(f"window length must be a power of two >= 2, got {self.M}")
        if self.n < 1:
            raise ValueError(f"bit width must be >= 1, got {self.n}")

    @property
    def data_qubits(self) -> int:
        return self.n + (self.m if self.unique_mode else 0)

    @property
    def total_qubits(self) -> int:
        return self.m + self.data_qubits


@dataclass(frozen=True)
class EncodedWindow:
    geometry: RegisterGeometry
    values: tuple
    reference: int

    @property
    def words(self) -> tuple:
        """Data-register contents; in unique mode the index fills the low m bits."""
        if not self.geometry.unique_mode:
            return self.values
        m = self.geometry.m
        return tuple((v << m) | j for j, v in enumerate(self.values))

    @property
    def has_duplicates(self) -> bool:
        return len(set(self.values)) != len(self.values)

    @property
    def interferes(self) -> bool:
        """True when equal data words make branches interfere."""
        return len(set(self.words)) != len(self.words)


@dataclass(frozen=True)
class BranchAngleTable:
    thetas: np.ndarray


@dataclass(frozen=True)
class Distribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64)
        if p.ndim != 1 or len(p) < 1:
            raise ValueError("probabilities must be a non-empty vector")
        if np.any(p < -PROB_TOL) or np.any(p > 1 + PROB_TOL):
            raise ValueError("probabilities outside [0, 1]")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}")
        p = np.clip(p, 0.0, 1.0)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self) -> int:
        return len(self.probs)

    def to_json(self, counts=None, shots: int | None = None, seed: int | None = None) -> dict:
        out = {"probs": [float(x) for x in self.probs]}
        if counts is not None:
            out["counts"] = [int(c) for c in counts]
            out["shots"] = int(shots if shots is not None else sum(out["counts"]))
            out["seed"] = seed
        return out


def encode_window(values: Sequence[int], reference: int, n: int, unique_mode: bool = True) -> EncodedWindow:
    values = tuple(int(v) for v in values)
    M = len(values)
    m = M.bit_length() - 1
    if M < 2 or 1 << m != M:
        raise ValueError(f"window length must be a power of two >= 2, got {M}")
    geom = RegisterGeometry(M, m, int(n), bool(unique_mode))
    hi = 1 << geom.n
    for pos, v in enumerate(values):
        if not 0 <= v < hi:
            raise ValueError(f"value {v} at position {pos} does not fit in {n} bits")
    if not 0 <= int(reference) < hi:
        raise ValueError(f"reference {reference} does not fit in {n} bits")
    return EncodedWindow(geom, values, int(reference))


def rotation_angle(bit: int, n: int) -> float:
    """Matrix parameter of the rotation controlled by data bit ``bit`` (weight 2^bit)."""
    return math.pi * (1 << bit) / (1 << n)


def branch_angles(w: EncodedWindow) -> BranchAngleTable:
    """Half-angles theta_j, computed bit by bit and in closed form (must agree)."""
    n = w.geometry.n
    r = w.reference
    d = np.asarray(w.values, dtype=np.int64)
    closed = math.pi * (r - d) / (1 << (n + 1))
    bits = np.arange(n)
    diff = ((r >> bits) & 1)[None, :] - ((d[:, None] >> bits[None, :]) & 1)
    weights = math.pi / (2.0 ** (n - bits + 1))
    bitwise = diff @ weights
    if np.max(np.abs(closed - bitwise)) > ANGLE_TOL:
        raise ArithmeticError("bitwise and closed-form branch angles disagree")
    return BranchAngleTable(closed)


def _require_distinct(w: EncodedWindow) -> None:
    if w.interferes:
        raise DistinctnessError(
            "window has repeated values without unique mode; the closed form assumes all "
            "data words are distinct (repeated words interfere). Enable unique_mode or use "
            "simulate_statevector."
        )


def analytic_distribution(w: EncodedWindow) -> Distribution:
    """P(k) = (cos^2 theta_k + sum_{j!=k} sin^2 theta_j / (M-1)) / M."""
    _require_distinct(w)
    theta = branch_angles(w).thetas
    M = w.geometry.M
    cos2 = np.cos(theta) ** 2
    sin2 = np.sin(theta) ** 2
    probs = (cos2 + (sin2.sum() - sin2) / (M - 1)) / M
    return Distribution(probs)


def branch_amplitudes(w: EncodedWindow) -> np.ndarray:
    """Signed counter amplitudes per branch, shape (M, M): row j is branch j."""
    _require_distinct(w)
    geom = w.geometry
    theta = branch_angles(w).thetas
    scale = 1.0 / math.sqrt(geom.M)
    return np.stack([scale * rotation_column(geom.m, 2.0 * t, j) for j, t in enumerate(theta)])


def simulate_branches(w: EncodedWindow) -> Distribution:
    amps = branch_amplitudes(w)
    return Distribution((amps**2).sum(axis=0))


def interfering_branches(w: EncodedWindow) -> Distribution:
    """Branch computation that also handles repeated data words.

    Indices sharing a word form one branch whose counter state is
    R(Theta) applied to the sum of their basis vectors, so equal values
    interfere exactly as in the full circuit.
    """
    geom = w.geometry
    groups: dict[int, list[int]] = {}
    for j, word in enumerate(w.words):
        groups.setdefault(word, []).append(j)
    theta = branch_angles(w).thetas
    probs = np.zeros(geom.M)
    for members in groups.values():
        t = theta[members[0]]
        vec = sum(rotation_column(geom.m, 2.0 * t, j) for j in members) / math.sqrt(geom.M)
        probs += vec**2
    return Distribution(probs)


def qara_circuit(w: EncodedWindow, rotations: str = "gates") -> list:
    """Algorithm steps as a list of ("gates", GateList) / ("dense", ...) items.

    Qubit layout: data word bit b is qubit b, counter bit c is qubit
    ``data_qubits + c``.
    """
    geom = w.geometry
    nd, m = geom.data_qubits, geom.m
    size = geom.total_qubits
    cq = [nd + c for c in range(m)]
    steps = []
    prep = [GateOp(HADAMARD, q) for q in cq]
    for j, word in enumerate(w.words):
        marks = [GateOp(NOT, cq[c]) for c in range(m) if not (j >> c) & 1]
        loads = [
            GateOp(NOT, b, tuple((q, True) for q in cq)) for b in range(nd) if (word >> b) & 1
        ]
        prep += marks + loads + marks
    steps.append(("gates", GateList(size, tuple(prep))))
    value_offset = m if geom.unique_mode else 0
    for i in range(geom.n):
        phi = rotation_angle(i, geom.n)
        dq = value_offset + i
        if (w.reference >> i) & 1:
            steps.append(_rotation_step(m, phi, cq, size, None, rotations))
        steps.append(_rotation_step(m, -phi, cq, size, dq, rotations))
    return steps


def _rotation_step(m, phi, cq, size, control, rotations):
    if rotations == "dense":
        return ("dense", (dense_rotation(m, phi).entries, control))
    if rotations != "gates":
        raise ValueError(f"unknown rotation backend {rotations!r}")
    gl = relabel(decompose_rotation(m, phi), cq, size)
    if control is not None:
        gl = controlled(gl, [(control, True)])
    return ("gates", gl)


def simulate_statevector(w: EncodedWindow, rotations: str = "gates") -> Distribution:
    """Full circuit simulation; the counter marginal sums over data-register states.

    ``rotations="gates"`` runs every rotation through its elementary-gate
    decomposition, ``"dense"`` multiplies the counter block by the dense matrix.
    """
    geom = w.geometry
    if geom.total_qubits > MAX_STATEVECTOR_QUBITS:
        raise ValueError(
            f"{geom.total_qubits} qubits exceeds the statevector limit of "
            f"{MAX_STATEVECTOR_QUBITS}; use simulate_branches for large windows"
        )
    nd = geom.data_qubits
    psi = np.zeros(1 << geom.total_qubits)
    psi[0] = 1.0
    for kind, payload in qara_circuit(w, rotations):
        if kind == "gates":
            psi = payload.apply_to(psi)
        else:
            mat, control = payload
            grid = psi.reshape(geom.M, 1 << nd)
            if control is None:
                grid[:] = mat @ grid
            else:
                cols = (np.arange(1 << nd) >> control) & 1 == 1
                grid[:, cols] = mat @ grid[:, cols]
    grid = psi.reshape(geom.M, 1 << nd)
    return Distribution((grid**2).sum(axis=1))


def sample_index(dist: Distribution, shots: int, seed: int) -> np.ndarray:
    """Multinomial measurement counts per index, reproducible for a given seed."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = np.asarray(dist.probs, dtype=np.float64)
    rng = np.random.default_rng(seed)
    return rng.multinomial(shots, p / p.sum())


def window_distribution(w: EncodedWindow) -> Distribution:
    # closed form when branches cannot interfere; it agrees with the branch
    # and statevector backends and is the cheapest
    if not w.interferes:
        return analytic_distribution(w)
    return interfering_branches(w)


def run_qara(
    values: Sequence[int],
    reference: int,
    n: int,
    mode: str = "argmax",
    seed: int | None = None,
    unique_mode: bool = True,
) -> tuple[int, int]:
    """Run the algorithm once and return ``(index, values[index])``.

    ``mode="sampled"`` draws a single measurement using ``seed``;
    ``mode="argmax"`` takes the most probable index, lowest index on ties.
    """
    w = encode_window(values, reference, n, unique_mode)
    idx = pick_index(window_distribution(w), mode, seed)
    return idx, w.values[idx]


def pick_index(dist: Distribution, mode: str, seed=None) -> int:
    if mode == "argmax":
        return int(np.argmax(dist.probs))
    if mode == "sampled":
        if seed is None:
            raise ValueError("sampled mode needs an explicit seed")
        p = np.asarray(dist.probs)
        return int(np.random.default_rng(seed).choice(len(p), p=p / p.sum()))
    raise ValueError(f"unknown mode {mode!r}")


def rotation_count(n: int) -> int:
    """Controlled rotations issued per window: one pair per data bit, independent of M."""
    return 2 * n


def best_case_probability(M: int, n: int) -> float:
    """Outlier probability for a lone all-ones outlier among reference-valued elements."""
    if M < 2 or n < 1:
        raise ValueError("need M >= 2 and n >= 1")
    return math.cos(math.pi / 2 - math.pi / (1 << (n + 1))) ** 2 / M


def outlier_bound(M: int, n: int, l: int, p: int) -> float:
    """Upper bound on the outlier probability when d_k >= 2^l r and |d_j - r| <= r / 2^p.

    Holds when the outlier also occupies the top data bit (d_k >= 2^(n-1)).
    """
    if M < 2 or n < 1 or l < 1 or p < 0:
        raise ValueError("need M >= 2, n >= 1, l >= 1, p >= 0")
    return (
        math.cos(math.pi / 4 - math.pi / 2 ** (l + 2)) ** 2 + math.sin(math.pi / 2 ** (l + p + 1)) ** 2
    ) / M

"""Classical simulation and filtering toolkit for quantum amplitude redistribution."""

from qara.tensor import DenseOperator, StateVector, apply, approx_equal, kron, mat_mul
from qara.rotation import (
    GateList,
    GateOp,
    controlled,
    decompose_rotation,
    dense_rotation,
    gate_metrics,
    hadamard_n,
    verify_lemma_hrh,
)
from qara.engine import (  # noqa
    Distribution,
    EncodedWindow,
    RegisterGeometry,
    analytic_distribution,
    best_case_probability,
    branch_angles,
    encode_window,
    outlier_bound,
    run_qara,
    sample_index,
    simulate_branches,
    simulate_statevector,
)

__version__ = "0.1.0"

__all__ = [
    "DenseOperator",
    "Distribution",
    "EncodedWindow",
    "GateList",
    "GateOp",
    "RegisterGeometry",
    "StateVector",
    "analytic_distribution",
    "apply",
    "approx_equal",
    "best_case_probability",
    "branch_angles",
    "controlled",
    "decompose_rotation",
    "dense_rotation",
    "encode_window",
    "gate_metrics",
    "hadamard_n",
    "kron",
    "mat_mul",
    "outlier_bound",
    "run_qara",
    "sample_index",
    "simulate_branches",
    "simulate_statevector",
    "verify_lemma_hrh",
]

"""Dense simulator and verification toolkit for d-level cluster-state
measurement-based quantum computation."""

from .algebra import (
    CliffordSpec,
    FactorStep,
    basic_clifford,
    clifford_from_action,
    compose_factor_word,
    diag_generator,
    factor_clifford,
    fourier,
    gen_x,
    gen_z,
    param_unitary,
    weyl,
    x_eigenvector,
    zbar,
)
from .cluster import (
    ClusterGraph,
    chain,
    cluster_state,
    entangler,
    evolution_time,
    gate_graph,
    grid_graph,
    hamiltonian_evolution,
    stabilizer_residuals,
)
from .measure import (
    BranchCapExceeded,
    MeasurementPattern,
    OutcomeRecord,
    Stage,
    enumerate_branches,
    measure_site,
    run_pattern_sampled,
)
from .oracle import (
    VerificationReport,
    certify_protocol,
    connectedness_suite,
    destruction_suite,
    entanglement_entropy,
    oracle_cluster_state_1d,
    theorem1_suite,
)
from .protocols import (
    ByproductOp,
    GateProtocol,
    byproduct_compose,
    compile_single_qudit,
    protocol_clifford,
    protocol_rot_x,
    protocol_rot_z,
    protocol_t,
    run_gate,
    solve_diagonal_exponents,
    t_gate,
    theorem2_check,
)
from .states import (
    StateVector,
    apply_local,
    apply_phase_gate,
    basis_ket,
    equal_up_to_phase,
    plus_state,
    project_site,
    reduced_density,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

"""Quantum-walk equivalence between weighted graphs and linear chains."""

from .basis import BasisTransform
from .chains import (
    Chain,
    ChainDecomposition,
    auxiliary_norms,
    chain_matrix,
    decomposition_to_json,
    full_decompose,
    krylov_chain,
    verify_chain,
)
from .cube import (
    CubeAmplitudes,
    CubeSolution,
    PhaseSystem,
    build_cube,
    check_split_conditions,
    gate_check,
    phase_system,
    solve_return_walk,
    split_cube,
)
from .errors import *  # noqa: F401,F403
from .evolution import (
    Spectrum,
    WalkTrace,
    compare_walks,
    default_times,
    is_identity_up_to_sign,
    propagator,
    return_amplitude,
    transfer_amplitude,
)
from .graph import (
    Edge,
    WeightedGraph,
    bipartite_partition,
    build_graph,
    graph_from_matrix,
    graph_to_json,
    json_to_graph,
)
from .transforms import (
    ConditionCheck,
    RewriteResult,
    branches_to_fourloop,
    check_condition,
    fourloop_to_branches,
    reduce_three_loop,
    rhomboid_expand,
    rhomboid_reduce,
    shift_one_segment_branch,
    sixloop_reduce,
)

__version__ = "0.1.0"

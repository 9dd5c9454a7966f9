"""Spectrally controlled dissipation on an ancilla chain.

Exact time evolution of a boundary-coupled chain, closed-form
decay/trapping classification of the boundary impurity, reduction of the
chain state to the target subsystem's density matrix, and a Lindblad
baseline for comparison.
"""

from .chain import (
    BlockSpec,
    ChainHamiltonian,
    ChainSpec,
    assemble_block_dense,
    basis_index,
    build_chain,
    decompose_block,
)
from .errors import InvalidSpecError, NumericsError
from .lindblad import LindbladModel, decay_model, integrate, lindblad_rhs
from .propagate import (
    HeatmapResult,
    ObservableSeries,
    PropagationResult,
    SpectralPropagator,
    basis_state,
    fit_decay_rate,
    occupation,
    occupation_heatmap,
    occupations,
    parity,
    propagate,
    simulate_observables,
    sites_for_time,
    time_grid,
)
from .reduced import (
    ChainBranch,
    InertBranch,
    ReducedTrajectory,
    TargetMap,
    check_density_matrix,
    mix_reduce,
    parity_mix_state,
    purity,
    reduce,
    reduce_trajectory,
    run_example1,
    run_example2,
    run_example4,
    trace_distance,
)
from .spectral import (
    BoundState,
    DecayVerdict,
    PhaseDiagramGrid,
    decay_condition,
    decay_verdict,
    find_bound_states,
    phase_diagram,
    trapped_weight,
)

__version__ = "0.1.0"

"""desynclab: pulse-coupled-oscillator desynchronization as numerical optimization.

Single-channel and joint multichannel TDMA coordination primitives, their
convergence bounds and spectral certificates, a discrete-event protocol
simulator, and a reproducible experiment harness.
"""

from .problems import (
    GRADIENT_LIPSCHITZ,
    MultichannelProblem,
    SingleChannelProblem,
    alpha_to_beta,
    as_phase_vector,
    beta_to_alpha,
    difference_matrix,
    ring_laplacian,
    wrap_bias,
)
from .objectives import (
    desync_gradient,
    desync_objective,
    gap_residual,
    multichannel_gradient_channel,
    multichannel_objective,
)
from .bounds import (
    desync_round_bound,
    fast_desync_round_bound,
    solution_distance,
    worst_case_distance_sq,
)
from .spectral import (
    SpectralReport,
    build_iteration_matrix,
    consensus_block_eigenvalues,
    desync_block_eigenvalues,
    spectral_report,
    sync_selector,
)
from .rounds import (
    ConvergenceReport,
    DesyncState,
    MultichannelState,
    NesterovState,
    desync_round,
    fast_desync_round,
    fast_sync_desync_round,
    momentum_coefficient,
    run_until_convergence,
    sync_desync_round,
)
from .eventsim import (
    FireEvent,
    NodeState,
    SimConfig,
    Simulation,
    SimulationResult,
    SwapError,
    TraceRecord,
    elect_sync_node,
    run_simulation,
    trace_to_csv,
)
from .experiments import (
    ExperimentSpec,
    SpecError,
    SweepResult,
    SweepRow,
    certify_spectra,
    compare_bounds,
    emit_plotdata,
    load_summary,
    parse_spec,
    run_sweep,
    serialize_spec,
)

__version__ = "0.1.0"

"""Distributed least-squares over networks: saddle-point flows, spectral
convergence tests, Euler step-size thresholds, and switching simulations."""

from .errors import (
    ConditionViolatedError,
    ConfigParseError,
    DimensionMismatchError,
    DivergedError,
    EquilibriumInfeasibleError,
    FingerprintMismatchError,
    InternalInconsistencyError,
    InvalidNodeError,
    LsqflowError,
    NoStableModesError,
    NotApplicableError,
    NotCharacterizedError,
    NothingToPlotError,
    NumericalFailureError,
    RankDeficientError,
    SchemaError,
    StepAlignmentError,
    TooSmallError,
)
from .problem import (
    AugmentedSystem,
    LeastSquaresSolution,
    NetworkLinearEquation,
    build_state_expansion,
    normal_equations_solution,
    residual_component,
    solve_least_squares,
)
from .graphs import (
    FAMILIES,
    Graph,
    LaplacianSpectrum,
    SupportReport,
    family_min_support,
    graph_from_dict,
    graph_to_dict,
    is_connected,
    laplacian,
    make_family,
    make_graph,
    spectrum,
    support_report,
)
from .spectral import (
    AssembledFlow,
    ConditionVerdict,
    SpectralReport,
    assemble,
    build_spectral_report,
    check_condition,
    epsilon_star,
    epsilon_star_from_eigenvalues,
    equilibrium_dual,
    flow_cost,
    flow_gradient,
    m_spectrum,
    predict_v_limit,
    zero_space_projector,
)
from .simulate import (
    DiscreteConfig,
    FlowState,
    Trajectory,
    component_names,
    component_series,
    ct_rhs,
    error_trajectory,
    oscillates,
    simulate_ct,
    simulate_dt,
    simulate_damped,
    write_trajectory_csv,
)
from .switching import (
    IntersectionResult,
    LimitSet,
    SwitchingSignal,
    check_support_fingerprint,
    limit_set,
    limit_sets_intersect,
    load_graph_pair,
    oscillation_period,
    simulate_switching,
    tail_sup_error,
)
from .plotting import PlotSpec, emit_plot
from .config import MODES, RunConfig, config_to_dict, parse_config, serialize_config
from .cli import main, run

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

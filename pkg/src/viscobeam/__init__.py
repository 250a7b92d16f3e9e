"""Spectral-Galerkin toolkit for the extensible viscoelastic beam on an
elastic foundation: exact steady states, two-backend time integration with
energy/Lyapunov monitors, stability thresholds, and attractor diagnostics."""

from .spectral import (
    LAMBDA_1,
    PI2,
    PI4,
    BeamParams,
    HistoryState,
    KernelError,
    MemoryKernel,
    ModalState,
    dissipation_functional,
    eigenvalue,
    evaluate_physical,
    memory_norm_sq,
    modal_norms,
)
from .statics import (
    Equilibrium,
    ResonantFamily,
    StationarySet,
    bifurcation_sweep,
    branch_amplitude,
    buckled_mode_count,
    buckling_load,
    critical_load,
    critical_mode,
    enumerate_equilibria,
    resonance,
    resonance_from_ratio,
    resonant_pairs,
    static_residual,
)
from .dynamics import (
    ConfigError,
    InitialData,
    IntegratorConfig,
    NumericalBlowup,
    Trajectory,
    augmented_energy,
    energy,
    lyapunov,
    perturbed_energy,
    simulate,
    simulate_batch,
)
from .stability import (
    DecayFit,
    StabilityVerdict,
    absorbing_radius,
    classify,
    coercivity,
    estimate_decay_rate,
    exponential_threshold,
    fit_log_slope,
    stability_map,
    uniform_energy_bound,
)
from .attractor import (
    ConnectionGraph,
    SplitConstants,
    SplitTrajectory,
    connection_graph,
    decomposition_constants,
    simulate_decomposition,
)
from .config import RunConfig, load_config, parse_config

__version__ = "0.1.0"

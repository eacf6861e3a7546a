"""Compressive parameter estimation for sparse translation-invariant signals.

The package estimates continuous time delays (and, for the companion
frequency model, continuous frequencies) of a sparse pulse train from
randomized compressive measurements.  The core idea is to replace the
discrete dictionary grid with a trigonometric polar arc between
neighbouring atoms, which turns grid-limited greedy recovery into
continuous estimation, either by interpolating the greedy step or by a
conic program over all arcs at once.
"""

from .analysis import SweepCell, ZetaReport, compute_zeta, lambda_sweep
from .bench import (
    CSV_HEADER,
    ExperimentConfig,
    default_config,
    draw_delays,
    emit_csv,
    parse_config_file,
    parse_csv,
    run_case,
    write_default_config,
)
from .cache import (
    CacheFormatError,
    load_arcs,
    load_dictionary,
    load_operator,
    rebuild_arcs,
    save_arcs,
    save_dictionary,
    save_operator,
)
from .conic import (
    CcbpProblem,
    CcbpSolution,
    ConicSolveError,
    SolverConfig,
    assemble_ccbp,
    constraint_violations,
    extract_estimates,
    l1_synthesis,
    solve_ccbp,
    spark_bound,
)
from .dictionary import (
    ArcBasisSet,
    BandExclusionConfig,
    ParametricDictionary,
    arc_frame_at,
    atom_vector,
    band_exclusion,
    build_arc_bases,
    build_dictionary,
    coherence,
    interpolate_on_arc,
)
from .estimators import (
    EstimationResult,
    EstimatorConfig,
    MetricRecord,
    MusicConfig,
    match_and_score,
    parabolic_handle,
    polar_handle,
    run_bomp,
    run_ccbp,
    run_ibomp,
    run_tde_music,
)
from .interpolators import (
    InterpolationEstimate,
    ProxyVector,
    UnstableFitError,
    compute_proxy,
    parabolic_interpolate,
    polar_interpolate,
)
from .sensing import MeasurementOperator, build_operator, measure
from .signals import (
    NoiseSpec,
    PulseSpec,
    SamplingGrid,
    SparseSignalParams,
    add_noise,
    sample_exponential,
    sample_pulse,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # signal model
    "PulseSpec",
    "SamplingGrid",
    "SparseSignalParams",
    "NoiseSpec",
    "sample_pulse",
    "sample_exponential",
    "synthesize",
    "add_noise",
    # dictionaries and arcs
    "ParametricDictionary",
    "ArcBasisSet",
    "BandExclusionConfig",
    "build_dictionary",
    "atom_vector",
    "coherence",
    "band_exclusion",
    "build_arc_bases",
    "arc_frame_at",
    "interpolate_on_arc",
    # sensing
    "MeasurementOperator",
    "build_operator",
    "measure",
    # interpolation
    "ProxyVector",
    "InterpolationEstimate",
    "UnstableFitError",
    "compute_proxy",
    "parabolic_interpolate",
    "polar_interpolate",
    # conic programs
    "CcbpProblem",
    "CcbpSolution",
    "ConicSolveError",
    "SolverConfig",
    "assemble_ccbp",
    "solve_ccbp",
    "constraint_violations",
    "extract_estimates",
    "l1_synthesis",
    "spark_bound",
    # estimators
    "EstimatorConfig",
    "EstimationResult",
    "MusicConfig",
    "MetricRecord",
    "run_bomp",
    "run_ibomp",
    "run_ccbp",
    "run_tde_music",
    "parabolic_handle",
    "polar_handle",
    "match_and_score",
    # analysis
    "ZetaReport",
    "SweepCell",
    "compute_zeta",
    "lambda_sweep",
    # benchmark harness
    "ExperimentConfig",
    "default_config",
    "parse_config_file",
    "write_default_config",
    "draw_delays",
    "run_case",
    "emit_csv",
    "parse_csv",
    "CSV_HEADER",
    # cache
    "CacheFormatError",
    "save_dictionary",
    "load_dictionary",
    "save_arcs",
    "load_arcs",
    "rebuild_arcs",
    "save_operator",
    "load_operator",
]

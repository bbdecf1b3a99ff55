"""Staged bilinear control synthesis for parabolic modal systems."""

from ._core import (  # noqa: F401
    AdmissibilityError,
    BiorthogonalBasis,
    CheckResult,
    ConeViolated,
    ConstantsReport,
    ContractionError,
    ContractionFit,
    ControlFailure,
    ControlSignal,
    DegenerateSequence,
    EstimateChecks,
    GmBoundReport,
    GramMatrix,
    HypothesisReport,
    HypothesisViolation,
    NotPositiveDefinite,
    PiecewiseControl,
    QuadratureFailure,
    ResidualTooLarge,
    RunReport,
    ScenarioConfigError,
    SeriesIdentityReport,
    SpectralModel,
    SpectralParseError,
    StageRecord,
    StageSchedule,
    StripViolated,
    ToleranceUnreachable,
    Trajectory,
    biorthogonal_family,
    build_model,
    calibrate_r1,
    combine,
    contraction_exponents,
    control_norm_sq,
    eval_sigma,
    gram_matrix,
    load_custom_spectral,
    moment_residual,
    propagate_free,
    run_cone_control,
    run_local_control,
    run_scenario,
    run_strip_control,
    shift_spectrum,
    simulate_bilinear,
    stage_schedule,
    theoretical_constants,
    verify_gm_bound,
    verify_run,
    verify_series_identities,
    verify_spectral_hypotheses,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

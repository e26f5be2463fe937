"""Joint rate-distortion function of a pair of Gaussian vector sources."""

from ._jointrdf import (
    Branch,
    CanonicalForm,
    Condition1Report,
    DistortionCheck,
    DistortionPair,
    Error,
    ErrorKind,
    GaussianPairSource,
    KktCertificate,
    SolveReport,
    SolverConfig,
    TestChannelRealization,
    closed_form_candidate,
    conditional_mean_map,
    cvf_objective,
    determinant_identity_residual,
    error_canonical_form,
    gray_lower_bound,
    in_region_d,
    marginal_rdf,
    mutual_information,
    rate_of,
    realize,
    simulate_distortion,
    solve,
    to_canonical_form,
    verify_condition1,
)

__all__ = [name for name in dir() if not name.startswith("_")]

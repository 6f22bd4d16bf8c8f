"""Linear response of SRB measures of perturbed cat maps for Dirac observables on curves."""

from .cones import AdmissibilityReport, check_circle, check_sloped_line, kappa, min_iterate_for_slope
from .dynamics import CAT, CAT_INVERSE, CAT_MATRIX, CatMap, PerturbationFamily, divergence_of_Xm
from .errors import ConfigError, ConvergenceError, HypothesisError, SrbResponseError
from .observables import (
    CircleLeaf,
    DiracObservable,
    MollifiedObservable,
    SlopedSegment,
    StableSegment,
    WindowFunction,
    bump,
    mollifier,
)
from .oracle import (
    FiniteDifferenceResponse,
    OrbitEstimate,
    UlamDensity,
    birkhoff_pair,
    fd_response,
    pair_with_density,
    ulam_density,
    ulam_pairing_estimate,
)
from .response import (
    ResponseSeriesResult,
    SparseFourierFunction,
    spectral_response,
    sum_series,
    term_post_cov,
    term_pre_cov,
    transfer_step,
)
from .torus import (
    LAMBDA,
    NU,
    FrameCoords,
    HyperbolicFrame,
    LiftPoint,
    TorusPoint,
    TrigPolyScalar,
    TrigPolyVectorField,
    frame,
    from_frame,
    lift,
    load_field,
    load_scalar,
    project,
    reduce_mod1,
    save_field,
    save_scalar,
    to_frame,
)

__version__ = "0.1.0"

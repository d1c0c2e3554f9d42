"""Low-rank fitting geometry and moment lower bounds for Prony spike trains."""

from .bounds import (
    BoundCertificate,
    ClusterCertificate,
    cluster_theta,
    regular_delta_lower_bound,
    regular_theta,
    theta_bound,
    zeta,
)
from .errors import (
    BadLambda,
    BadNoise,
    BadParams,
    BadScale,
    DegenerateNodes,
    NoRealRoots,
    NoRealSolution,
    NotNormalized,
    PronyError,
    ShapeError,
    ZeroAmplitude,
    ZeroMass,
)
from .hankel import (
    MinorReport,
    build_hankel,
    delta_l,
    factored_hankel,
    hankel_from_signal,
    numerical_rank,
    vandermonde,
)
from .kernels import BACKEND
from .prony import PronyProblem, PronySolution, fit_single_node, prony_solve
from .search import SearchConfig, SearchResult, min_moment_distance, seeded_starts
from .sigma import (
    AlphaRoots,
    Rejection,
    SigmaCase,
    SigmaCertificate,
    alpha_roots,
    complement_basis,
    distance_matrix,
    m2_gap,
    quad_form,
    sample_P,
    sigma_membership,
)
from .signal import (
    NormalizedSignal,
    RegularityParams,
    Signal,
    check_regularity,
    downscale_cluster,
    moments,
    normalized,
    perturb_moments,
    validate_signal,
)

__version__ = "0.1.0"

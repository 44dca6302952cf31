"""Quantum signal processing protocols and polynomial states in one and two variables."""

from .errors import (
    BadSupport,
    ConventionViolated,
    DimensionMismatch,
    IndefiniteParity,
    NotAPolynomialState,
    NotLowerable,
    NotNormalized,
    NotUnitary,
    PreconditionError,
    QSPError,
    SchemaError,
    ZeroEndpoint,
)
from .linalg import (
    complete_to_unitary,
    det2,
    haar_random_unitary,
    inner,
    orthogonal_complement,
    rank_span,
)
from .multivariate import (
    DECOMPOSABLE,
    INCONCLUSIVE,
    NOT_IMPLEMENTABLE,
    Protocol2DChoice,
    Protocol3D,
    QGammaResult,
    check_necessary_mqsp,
    check_sufficient_3d,
    check_unimplementable,
    decompose_3d,
    embed_2d_in_3d,
    evaluate_protocol_2d_choice,
    evaluate_protocol_3d,
    extract_step_3d,
    inapprox_radius,
    q_gamma,
    random_protocol_2d_choice,
    random_protocol_3d,
)
from .polystate import (
    ANALYTIC,
    LAURENT,
    PolynomialState,
    effective_dimension,
    evaluate_at,
    l2_distance,
    normalization_residual,
    shift_exponents,
    sup_distance_sampled,
)
from .report import DiagnosticReport, Verdict
from .univariate import (
    FULL,
    WX,
    WZ,
    XROT,
    ZROT,
    Protocol1D,
    SignalConvention,
    analytic_to_laurent_1d,
    classify_state_1d,
    convert_convention_1d,
    evaluate_protocol_1d,
    laurent_to_analytic_1d,
    random_protocol_1d,
    synthesize_1d,
)

__version__ = "0.1.0"

"""Numerical machinery for von Neumann-type inequalities of commuting
matrix tuples on the unit ball: joint spectra, Pick/multiplier norms for
the kernels (1 - <z,w>)^{-a}, ball automorphisms, Gleason splits, a
constructive multiplier algorithm with certified bounds, and reproducible
desk-scale experiments."""

from .errors import (
    BallmultError,
    ConditioningWarning,
    ConfigurationError,
    DomainError,
    NumericalError,
    PreconditionError,
    PropertyViolation,
    StructureError,
)
from .polynomials import Polynomial, compose_fractional, monomials_up_to, random_polynomial
from .tuples import (
    CauchyEstimate,
    DiagonalizabilityResult,
    MatrixTuple,
    PowerSeries,
    SeriesValue,
    SpectrumPointSet,
    TriangularizationResult,
    TupleDiagnostics,
    cauchy_integral_eval,
    commutation_residual,
    eval_poly_tuple,
    eval_series_tuple,
    is_jointly_diagonalizable,
    joint_spectrum,
    random_commuting_tuple,
    row_norm,
    simultaneous_triangularize,
    validate_tuple,
)
from .automorphisms import (
    BallAutomorphism,
    SpanReduction,
    apply_automorphism_point,
    apply_automorphism_tuple,
    involution_at,
    reduce_variables_diagonalizable,
    reduce_variables_span,
    unitary_automorphism,
)
from .expressions import (
    AutoBall,
    CoordLinear,
    Dilate,
    Embed,
    FunctionExpr,
    MobiusDisk,
    PolyExpr,
    Product,
    Project,
    RationalExpr,
    Sum,
    as_expr,
    constant_expr,
    coordinate_expr,
    eval_expr_point,
    eval_expr_tuple,
    partial_derivative,
)
from .kernels import (
    KernelSpec,
    PickCertificate,
    PointConfiguration,
    SearchResult,
    coordinate_row_condition,
    coordinate_row_norm,
    kernel_matrix,
    multiplication_tuple,
    npoint_norm_search,
    pick_certificate,
    restriction_multiplier_norm,
    restriction_norm_bisection,
    restriction_norm_details,
)
from .gleason import (
    SchurConfig,
    SchurResult,
    certified_constant,
    gleason_matrix_identity_residual,
    gleason_split_numeric,
    gleason_split_poly,
    rationalize,
    schur_construct,
)
from .experiments import (
    ExperimentReport,
    cdn_lower_curve,
    compressed_shift,
    counterexample_search,
    space_dimension,
    sup_norm_estimate,
    vn_fuzz_campaign,
    vn_ratio,
)

__version__ = "0.1.0"

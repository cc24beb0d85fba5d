"""Numerical laboratory for symplectic billiards on strictly convex domains."""

from .geometry import (
    DomainValidationError,
    EllipseSupport,
    FourierSupport,
    SupportFunction,
    TangentFrame,
    area,
    boundary_derivatives,
    boundary_point,
    boundary_tangent,
    conjugate_param,
    curvature_radius,
    domain_from_spec,
    domain_to_spec,
    fourier_projection,
    load_domain,
    omega,
    perimeter,
    sample_fourier_domain,
    support_eval,
    validate_support,
)
from .dynamics import (
    Configuration,
    GenDerivs,
    PhasePoint,
    RootBracketError,
    SCoords,
    SolverToleranceError,
    area_preservation_check,
    area_preservation_many,
    c2_bound,
    gen_derivs,
    gen_fn,
    inverse_step,
    orbit,
    rotation_number,
    s_coords,
    step,
    step_many,
)
from .variational import (
    ConjugateResult,
    JacobiField,
    NonStationaryError,
    SegmentHessian,
    conjugate_scan,
    conjugate_test,
    jacobi_propagate,
    segment_hessian,
)
from .quadrature import (
    BialyReport,
    GridConvergenceError,
    GridSpec,
    IdentityReport,
    ReparamSpec,
    bialy_report,
    bialy_torus,
    halving_check,
    identity_area,
    identity_l12sq,
    identity_reparam,
    identity_suite,
    isoperimetric_defect,
)
from .normalization import (
    AffineParams,
    NormalizationError,
    NormalizationResult,
    TransformedSupport,
    alpha_of_psi,
    asymptotic_check,
    asymptotic_constants,
    epsilon_curve,
    find_normalization,
    fourier2,
    i_integrals,
    normalize_domain,
    psi_of_alpha,
    transform_support,
)

__version__ = "0.1.0"

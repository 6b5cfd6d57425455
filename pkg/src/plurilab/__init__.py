"""plurilab: computable boundary geometry and pluripotential diagnostics on
explicit domains in C^n.

Submodules
    domains      defining functions, boundary distance, flat-disc radii
    kobayashi    invariant-metric bounds and the ratio divergence diagnostic
    monge_ampere complex Hessians, pullback fields, MA density, L^p estimates
    envelope     log-coordinate envelope solver, grid oracle, Holder fits
    mappings     proper-map pipeline: charts, cones, exponent chain, extension
    geodesics    ball geodesics, distance fits, Dini checks, radial extension
    peaks        psh peak functions via shadows and a numerical conformal map
    cli          batch front-end emitting JSON/CSV reports
"""

__version__ = "0.1.0"

from ._accel import backend_name
from .domains import (
    DirectionProbe,
    DomainSpec,
    boundary_distance,
    boundary_distance_batch,
    disc_radius,
    first_exit,
    make_builtin,
    omega_phi_profile,
    omega_phi_profile_inv,
)
from .envelope import (
    EnvelopeSolution,
    canonical_function,
    holder_fit,
    perron_oracle,
    reinhardt_envelope_solve,
)
from .geodesics import (
    AnalyticDisc,
    ball_geodesic,
    dini_check,
    hl_extend,
    intersection_domain,
    isometry_defect,
    mercer_fit,
)
from .kobayashi import (
    KobayashiBound,
    ModulusOfContinuity,
    PshCertificate,
    graham_bounds,
    holder_divergence,
    ma_lower,
    sibony_lower,
    upper_disc,
)
from .mappings import (
    HoloMapAnalysis,
    boundary_extend,
    cone_probe,
    example25,
    exponent_chain,
    hopf_fit,
    jacobian_lp_check,
    lipschitz_chart_fit,
    properness_probe,
)
from .monge_ampere import (
    HermitianField,
    complex_hessian,
    lp_norm_estimate,
    ma_density,
    pullback_field,
    pullback_matrix,
)
from .peaks import peak_function, riemann_map, support_frame

__all__ = [
    "__version__",
    "backend_name",
    "DomainSpec",
    "DirectionProbe",
    "make_builtin",
    "boundary_distance",
    "boundary_distance_batch",
    "disc_radius",
    "first_exit",
    "omega_phi_profile",
    "omega_phi_profile_inv",
    "KobayashiBound",
    "PshCertificate",
    "ModulusOfContinuity",
    "upper_disc",
    "graham_bounds",
    "sibony_lower",
    "ma_lower",
    "holder_divergence",
    "complex_hessian",
    "HermitianField",
    "pullback_matrix",
    "pullback_field",
    "ma_density",
    "lp_norm_estimate",
    "EnvelopeSolution",
    "reinhardt_envelope_solve",
    "perron_oracle",
    "canonical_function",
    "holder_fit",
    "HoloMapAnalysis",
    "example25",
    "properness_probe",
    "jacobian_lp_check",
    "hopf_fit",
    "exponent_chain",
    "boundary_extend",
    "lipschitz_chart_fit",
    "cone_probe",
    "AnalyticDisc",
    "ball_geodesic",
    "isometry_defect",
    "mercer_fit",
    "hl_extend",
    "dini_check",
    "intersection_domain",
    "support_frame",
    "riemann_map",
    "peak_function",
]

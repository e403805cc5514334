"""Numerical toolkit for maps of finite distortion at desk scale.

Explicit map families on balls and spheres, quadrature tuned to their
singularities, pointwise calculus (differentials, distortion, energies),
and a verification layer that turns oscillation and Jacobian estimates
into pass/fail reports with explicit hypotheses.
"""

from .geometry import (
    Region,
    TargetSpec,
    euclidean_target,
    geodesic_ball_volume,
    geodesic_distance,
    measures,
    sample_region,
    slice_volume_bound,
    slice_volume_exact,
    sphere_area,
    unit_ball_volume,
    unit_sphere_target,
)
from .quadrature import (
    CoreRule,
    QuadratureEstimate,
    integrate_ball,
    integrate_slice,
    integrate_sphere,
)
from .map_zoo import (
    DomainSpec,
    MapField,
    SingularSet,
    counterexample_map,
    counterexample_schedule,
    derivative_bound_check,
    make_map,
    orlicz_density,
)
from .calculus import (
    Differential,
    PointwiseData,
    differential,
    distortion,
    domain_region,
    energy,
    finite_distortion_audit,
    frame_matrix,
    jacobian_det,
    operator_norm,
    pointwise_data,
)
from .estimates import (
    ConstantsTable,
    Hypothesis,
    OscillationSample,
    VerificationReport,
    cap_bump_field,
    constant_field,
    constants,
    cosine_field,
    counterexample_audit,
    degree,
    height_field,
    jacobian_integral_match,
    morrey_constant,
    morrey_extremal_search,
    oscillation,
    verify_boundary_control,
    verify_morrey,
    verify_osc_log,
)
from .retraction import RetractionSpec, build_retraction, verify_retraction

__version__ = "0.1.0"

__all__ = [
    "Region", "TargetSpec", "euclidean_target", "geodesic_ball_volume",
    "geodesic_distance", "measures", "sample_region", "slice_volume_bound",
    "slice_volume_exact", "sphere_area", "unit_ball_volume",
    "unit_sphere_target",
    "CoreRule", "QuadratureEstimate", "integrate_ball", "integrate_slice",
    "integrate_sphere",
    "DomainSpec", "MapField", "SingularSet", "counterexample_map",
    "counterexample_schedule", "derivative_bound_check", "make_map",
    "orlicz_density",
    "Differential", "PointwiseData", "differential", "distortion",
    "domain_region", "energy", "finite_distortion_audit", "frame_matrix",
    "jacobian_det", "operator_norm", "pointwise_data",
    "ConstantsTable", "Hypothesis", "OscillationSample", "VerificationReport",
    "cap_bump_field", "constant_field", "constants", "cosine_field",
    "counterexample_audit", "degree", "height_field",
    "jacobian_integral_match", "morrey_constant", "morrey_extremal_search",
    "oscillation", "verify_boundary_control", "verify_morrey",
    "verify_osc_log",
    "RetractionSpec", "build_retraction", "verify_retraction",
    "__version__",
]

"""Discrete stability analysis of hypersurfaces in Gaussian-weighted space.

The package discretizes model hypersurfaces (spheres, planes, cylinders,
tori, graphs), checks the critical-point condition H = <x,N>/2 + C for the
weighted area functional, computes constrained spectra and the stability
index of the second-variation form, detects translational splitting, and
evaluates the associated curvature estimates.
"""

from .analytic import (
    DegenerateRadiusError,
    critical_constant,
    min_x_bound,
    plane_spectrum,
    sphere_harmonic_multiplicity,
    sphere_index,
    sphere_spectrum,
    unit_ball_volume,
)
from .estimates import (
    EstimateReport,
    ScreenResult,
    area_lower_bound_report,
    ball_region_integral,
    choi_schoen_epsilon,
    integral_curvature_report,
    mean_value_report,
    modified_stability_report,
    pointwise_decay_report,
    simons_residual_report,
    stability_constant,
    stability_screen,
)
from .jacobi import (
    AssemblyError,
    EigensolverError,
    IndexReport,
    IndexUndeterminedError,
    LocalizedSpanResult,
    OperatorAssembly,
    SpectrumResult,
    SplitReport,
    TranslationResidual,
    assemble,
    constrained_spectrum,
    face_gradients,
    localized_span_spectrum,
    product_rule_gap,
    splitting_kernel,
    stability_index,
    stiffness_matrix,
    translation_pairing_gap,
    translation_residual,
    vertex_gradient,
)
from .measure import (
    WeightSpec,
    WeightedMeasure,
    custom_weight,
    gaussian_weight,
    mean_normal,
    project_mean_zero,
    radial_cutoff,
    shifted_weight,
    weighted_area,
    weighted_inner,
    weighted_measure,
)
from .meshio import read_mesh, write_mesh
from .surface import (
    GeometryError,
    GeometryField,
    MeshError,
    SurfaceMesh,
    SurfaceSpec,
    compute_geometry,
    criticality_residual,
    generate,
    make_mesh,
    max_edge_length,
    refine,
    vertex_areas,
    vertex_normals,
)

__version__ = "0.1.0"

"""gerbedex: spin geometry with gerbe twists, end to end.

Clifford algebra and spin lifts, nerve cohomology with torsion, transition
cocycle extraction, graded modules with connections, character forms, and two
independent index computations that are expected to agree.
"""

from .cech import (
    BocksteinResult,
    Cochain,
    CohomologyResult,
    Nerve,
    bockstein,
    coboundary,
    cohomology,
    is_cocycle,
    lens_complex,
    projective_plane,
    solve_coboundary,
    standard_lens_cocycle,
    tetrahedron_sphere,
    zero_cochain,
)
from .characteristic import (
    IndexReport,
    MixedForm,
    a_hat,
    clifford_commutant_residual,
    relative_character_of_module,
    relative_chern_character,
    topological_index,
    twisted_chern_character,
    twisting_curvature,
)
from .clifford import (
    CliffordElement,
    CliffordModuleFiber,
    LiftAmbiguityError,
    SpinElement,
    SpinorRep,
    TwistingFactor,
    canonical_lift,
    clifford_of_curvature,
    extract_twisting_factor,
    nearest_lift,
    plane_rotation,
    relative_supertrace,
    represent,
    spinor_rep,
)
from .gerbe import (
    BundleData,
    EdgeSampleGraph,
    GerbeCocycle,
    GerbeModuleData,
    HolonomyError,
    LiftedTransitionData,
    ModuleCheck,
    TransitionData,
    descend_weight_zero,
    direct_sum,
    endomorphism_descent,
    identity_module,
    lift_transitions,
    spin_module,
    tensor_modules,
    verify_module,
    weight_decompose,
)
from .geometry import (
    Chart,
    ChartAtlas,
    FormField,
    ModuleConnection,
    OverlapMap,
    connection_difference,
    curvature,
    integrate_top,
    tensor_connection,
)
from .manifest import (
    ParsedManifest,
    build_manifest,
    parse_manifest,
    read_manifest,
    read_nerve,
    sphere_frame_manifest,
    write_manifest,
    write_nerve,
)
from .registry import (
    ProjectivePlaneBenchmark,
    SphereBenchmark,
    TorusBenchmark,
    benchmark_registry,
    perturbed_connection,
)
from .spectral import (
    LatticeDiracOperator,
    LatticeGauge,
    MonopoleKernel,
    build_flux_background,
    index_compare,
    monopole_kernel,
    overlap_index,
    wilson_dirac,
)
from .symbolic import RingElement

__version__ = "0.1.0"

__all__ = [
    "BocksteinResult",
    "BundleData",
    "Chart",
    "ChartAtlas",
    "CliffordElement",
    "CliffordModuleFiber",
    "Cochain",
    "CohomologyResult",
    "EdgeSampleGraph",
    "FormField",
    "GerbeCocycle",
    "GerbeModuleData",
    "HolonomyError",
    "IndexReport",
    "LatticeDiracOperator",
    "LatticeGauge",
    "LiftAmbiguityError",
    "LiftedTransitionData",
    "MixedForm",
    "ModuleCheck",
    "ModuleConnection",
    "MonopoleKernel",
    "Nerve",
    "OverlapMap",
    "ParsedManifest",
    "ProjectivePlaneBenchmark",
    "RingElement",
    "SphereBenchmark",
    "SpinElement",
    "SpinorRep",
    "TorusBenchmark",
    "TransitionData",
    "TwistingFactor",
    "a_hat",
    "benchmark_registry",
    "bockstein",
    "build_flux_background",
    "build_manifest",
    "canonical_lift",
    "clifford_commutant_residual",
    "clifford_of_curvature",
    "coboundary",
    "cohomology",
    "connection_difference",
    "curvature",
    "descend_weight_zero",
    "direct_sum",
    "endomorphism_descent",
    "extract_twisting_factor",
    "identity_module",
    "index_compare",
    "integrate_top",
    "is_cocycle",
    "lens_complex",
    "lift_transitions",
    "monopole_kernel",
    "nearest_lift",
    "overlap_index",
    "parse_manifest",
    "perturbed_connection",
    "plane_rotation",
    "projective_plane",
    "read_manifest",
    "read_nerve",
    "relative_character_of_module",
    "relative_chern_character",
    "relative_supertrace",
    "represent",
    "solve_coboundary",
    "sphere_frame_manifest",
    "spin_module",
    "spinor_rep",
    "standard_lens_cocycle",
    "tensor_connection",
    "tensor_modules",
    "tetrahedron_sphere",
    "topological_index",
    "twisted_chern_character",
    "twisting_curvature",
    "verify_module",
    "weight_decompose",
    "wilson_dirac",
    "write_manifest",
    "write_nerve",
    "zero_cochain",
]

"""Grid sets, coordinate X-rays, conic distance fields, and their checkers.

The package models finite unions of axis-aligned grid cells, the
piecewise-quadratic taxicab distance fields they generate, certified
set metrics (Hausdorff, tube areas), executable verifiers for the
quantitative properties of those objects, and reconstruction of a set
from its field by exhaustive search or simulated annealing.
"""

from .checks import (
    CheckReport,
    check_area_superadditivity,
    check_concavity,
    check_convergence,
    check_dilation_bound,
    check_polyline_bound,
    check_stability_bound,
    reproduce_remark2,
)
from .conic import (
    ConicEvaluator,
    XRayProfile,
    conic_of,
    conic_value_exact,
    field_to_csv,
    field_to_pgm,
    l1_norm_diff,
    parse_profile_csv,
    profile_to_csv,
    sup_norm_diff,
    xray_from_conic,
    xray_h,
    xray_v,
    xrays_equal_ae,
)
from .errors import (
    ConicError,
    CoverageError,
    EmptySet,
    FormatError,
    GeometryMismatch,
    InvalidParameter,
    NonConvexColumn,
    NonSimpleChain,
    PreconditionViolated,
    TooLarge,
    ZeroMass,
)
from .grid import (
    Box,
    ColumnProfile,
    GridGeometry,
    GridSet,
    bound_functions,
    combine,
    dilate,
    enumerate_hv_connected,
    format_hvset,
    has_contiguous_runs,
    in_level_set,
    in_sublevel_set,
    is_connected,
    is_hv_convex,
    min_cover,
    parse_hvset,
    projections,
    sample_hv_convex,
    subset_of,
    thin_contact,
)
from .metrics import (
    Bracket,
    Polyline,
    boundary_chains,
    dist_p,
    format_polyline,
    hausdorff,
    parse_polyline,
    tube_area,
)
from .reconstruct import (
    AnnealingParams,
    ReconstructionProblem,
    ReconstructionResult,
    exhaustive,
    load_problem,
    local_search,
    objective,
    write_result,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "GridGeometry",
    "GridSet",
    "ColumnProfile",
    "Bracket",
    "Polyline",
    "XRayProfile",
    "ConicEvaluator",
    "CheckReport",
    "ReconstructionProblem",
    "AnnealingParams",
    "ReconstructionResult",
    "ConicError",
    "InvalidParameter",
    "GeometryMismatch",
    "EmptySet",
    "NonConvexColumn",
    "CoverageError",
    "TooLarge",
    "ZeroMass",
    "PreconditionViolated",
    "NonSimpleChain",
    "FormatError",
    "projections",
    "in_level_set",
    "in_sublevel_set",
    "is_hv_convex",
    "has_contiguous_runs",
    "is_connected",
    "thin_contact",
    "subset_of",
    "bound_functions",
    "combine",
    "dilate",
    "min_cover",
    "sample_hv_convex",
    "enumerate_hv_connected",
    "format_hvset",
    "parse_hvset",
    "dist_p",
    "hausdorff",
    "tube_area",
    "boundary_chains",
    "format_polyline",
    "parse_polyline",
    "xray_v",
    "xray_h",
    "conic_of",
    "xray_from_conic",
    "sup_norm_diff",
    "l1_norm_diff",
    "xrays_equal_ae",
    "conic_value_exact",
    "profile_to_csv",
    "parse_profile_csv",
    "field_to_csv",
    "field_to_pgm",
    "check_concavity",
    "check_area_superadditivity",
    "reproduce_remark2",
    "check_dilation_bound",
    "check_stability_bound",
    "check_convergence",
    "check_polyline_bound",
    "objective",
    "exhaustive",
    "local_search",
    "load_problem",
    "write_result",
    "__version__",
]

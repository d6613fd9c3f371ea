"""Orlicz norms, simplicial and discrete de Rham complexes, and the
Cech-de Rham zig-zag between them."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DimensionMismatchError,
    InvalidComplexError,
    InvalidDegreeError,
    InvalidParameterError,
    NotACocycleError,
    NotFoundError,
    NotInKernelError,
    NumericalBreakdownError,
    OrliczLabError,
    SpecError,
    UnsupportedDimensionError,
)
from .young import (  # noqa: E402
    YoungFunction,
    check_young,
    complementary,
    conjugate,
    delta2_margin,
    make_exp,
    make_power,
    make_power_log,
    parse_phi,
    scale,
)
from .orlicz import (  # noqa: E402
    DiscreteMeasure,
    check_holder,
    check_scaling_equivalence,
    luxemburg,
    luxemburg_norm,
    modular,
)
from .simplicial import (  # noqa: E402
    Cochain,
    SimplicialComplex,
    barycentric_subdivision,
    coboundary,
    coboundary_norm_estimate,
    cochain_norm,
    geometry_stats,
)
from .cohomology import LinearComplex, betti_numbers, cohomology_dim, harmonic_basis  # noqa: E402
from .mesh import (  # noqa: E402
    Mesh,
    MeshForm,
    PiecewiseForm,
    derham_map,
    exterior_derivative,
    integrate_form,
    load_mesh,
    lphi_norm,
    mesh_quadrature,
    pointwise_norm,
    whitney_interpolate,
)

__all__ = [
    "__version__",
    "Cochain",
    "DimensionMismatchError",
    "DiscreteMeasure",
    "InvalidComplexError",
    "InvalidDegreeError",
    "InvalidParameterError",
    "LinearComplex",
    "Mesh",
    "MeshForm",
    "NotACocycleError",
    "NotFoundError",
    "NotInKernelError",
    "NumericalBreakdownError",
    "OrliczLabError",
    "PiecewiseForm",
    "SimplicialComplex",
    "SpecError",
    "UnsupportedDimensionError",
    "YoungFunction",
    "barycentric_subdivision",
    "betti_numbers",
    "check_holder",
    "check_scaling_equivalence",
    "check_young",
    "coboundary",
    "coboundary_norm_estimate",
    "cochain_norm",
    "cohomology_dim",
    "complementary",
    "conjugate",
    "delta2_margin",
    "derham_map",
    "exterior_derivative",
    "geometry_stats",
    "harmonic_basis",
    "integrate_form",
    "load_mesh",
    "lphi_norm",
    "luxemburg",
    "luxemburg_norm",
    "make_exp",
    "make_power",
    "make_power_log",
    "mesh_quadrature",
    "modular",
    "parse_phi",
    "pointwise_norm",
    "scale",
    "whitney_interpolate",
]

"""Origin-symmetric convex bodies and the elementary maps on them."""
from .bodies import (
    Ball,
    Box,
    ConvexBody,
    Cylinder,
    Facet,
    FacetListedPolytope,
    Parallelotope,
    Polytope,
    Prism,
    SymHPolytope,
    SymVPolytope,
    VPolytope,
)
from .hull import BudgetError, DegenerateError, UnboundedError
from .ops import (
    box,
    build_facets,
    contains,
    cross_polytope,
    cube,
    enumerate_vertices,
    linear_image,
    minkowski_combination,
    parallelotope,
    prism,
    project,
    radial,
    random_symmetric_polytope,
    reflect,
    reverse_radial_gauss_contains,
    segment,
    support,
    translate,
)
from .selection import FacetSubset, FullSphere, NormalSelection, Subspace, SubspaceCap

__all__ = [
    "Ball",
    "Box",
    "BudgetError",
    "ConvexBody",
    "Cylinder",
    "DegenerateError",
    "Facet",
    "FacetListedPolytope",
    "FacetSubset",
    "FullSphere",
    "NormalSelection",
    "Parallelotope",
    "Polytope",
    "Prism",
    "Subspace",
    "SubspaceCap",
    "SymHPolytope",
    "SymVPolytope",
    "UnboundedError",
    "VPolytope",
    "box",
    "build_facets",
    "contains",
    "cross_polytope",
    "cube",
    "enumerate_vertices",
    "linear_image",
    "minkowski_combination",
    "parallelotope",
    "prism",
    "project",
    "radial",
    "random_symmetric_polytope",
    "reflect",
    "reverse_radial_gauss_contains",
    "segment",
    "support",
    "translate",
]

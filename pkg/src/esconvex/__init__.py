"""Exact tools for convex position in planar and spatial point sets."""
from .errors import (
    AssemblyFailed,
    DegenerateInput,
    DimensionMismatch,
    EmptySetProduced,
    EsConvexError,
    GuardExceeded,
    HullsDisjoint,
    InputTooSmall,
    NonGenericDirection,
    NoPolygonOfRequestedSize,
    NotFound,
    NotPFree,
    PlaneConstructionFailed,
    PreconditionViolated,
    SearchExhausted,
    SeparationFailed,
    ThresholdNotMet,
    TooFewPoints,
)
from .geometry import (
    HalfSpaceSystem,
    OrientedPlane,
    PointSet,
    Polytope,
    convex_hull,
    hulls_disjoint,
    is_convex_position,
    is_general_position,
)

__version__ = "0.1.0"

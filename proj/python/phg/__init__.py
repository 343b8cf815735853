"""Batched polyhedral homotopy evaluation and path tracking."""

from ._phg import (
    DegenerateTangent,
    MonomialOverflow,
    ParseError,
    PhgError,
    ShapeError,
    SingularJacobian,
    StartPointInvalid,
    System,
    UsageError,
    ZeroCoordinate,
    backends,
    chordal_distance,
    directions,
    evaluate,
    gen_chandra,
    gen_cyclic,
    gen_random,
    oracle,
    seeded_starts,
    track,
)

__all__ = [
    "DegenerateTangent",
    "MonomialOverflow",
    "ParseError",
    "PhgError",
    "ShapeError",
    "SingularJacobian",
    "StartPointInvalid",
    "System",
    "UsageError",
    "ZeroCoordinate",
    "backends",
    "chordal_distance",
    "directions",
    "evaluate",
    "gen_chandra",
    "gen_cyclic",
    "gen_random",
    "oracle",
    "seeded_starts",
    "track",
]

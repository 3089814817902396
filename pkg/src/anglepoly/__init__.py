"""Closed polygons with prescribed turning angles, in the plane and in space."""

from .errors import (
    AnglePolyError,
    DegenerateVertex,
    InconsistentSequence,
    InternalInconsistency,
    LengthBelowFenchel,
    NoWitness,
    NotClosedToInteger,
    OutOfRange,
    PreconditionViolation,
    RecursionExhausted,
    SignedSequenceInconsistent,
    TooLarge,
    Unrealizable,
)
from .geom import (
    AngleSequence,
    ConvexWitness,
    Dimension,
    PlanarPolygon,
    PolarInterval,
    SphericalPolygon,
    count_crossings,
    origin_in_relint_conv,
    polar_add,
    polar_sub,
    spherical_distance,
    turning_angle_2d,
    turning_number,
)
from .lift import (
    SpacePolygon,
    ThrackleVerdict,
    forced_planar_thrackle_check,
    lift_planar,
    lift_to_polygon,
    realize_3d,
)
from .oracle import (
    SamplerConfig,
    allpairs_crossings,
    hull_contains_origin_sampling,
    sample_spherical_closure,
)
from .planar import check_consistency, crossing_number, realize_min_crossing
from .spherical import (
    Decision,
    ReachZone,
    ZoneTrace,
    backtrack_realization,
    decide_spherical,
    enclose_origin,
    propagate_zones,
    reach_zone,
    straighten,
)

__version__ = "0.1.0"

"""Motion of Julia sets along parameter rays toward Misiurewicz parameters."""

from .context import MisiurewiczContext, cached_context, make_context
from .partition import PartitionCurve, build_partition, classify_side
from .realize import (JuliaPoint, MotionPath, RealizedBatch, derivative_series, follow_motion,
                      itinerary_of_point, point_from_itinerary, realize_batch)
from .report import VerificationReport

__all__ = ["MisiurewiczContext", "cached_context", "make_context", "PartitionCurve", "build_partition", "classify_side",
           "JuliaPoint", "MotionPath", "RealizedBatch", "derivative_series", "follow_motion", "itinerary_of_point",
           "point_from_itinerary", "realize_batch", "VerificationReport"]

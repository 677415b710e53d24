"""External rays, Boettcher coordinates and Julia-set motion for z^2 + c."""

from .angles import ExactAngle
from .errors import RayflowError

__version__ = "0.1.0"
__all__ = ["ExactAngle", "RayflowError", "__version__"]

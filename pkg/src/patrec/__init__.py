"""Rate surfaces, envelopes, simulation and identity checks for compressed pattern recognition."""

from .errors import ConsistencyError, DegenerateInputError, SamplingError
from .info_core import JointPMF, RateTriple
from .surface import GridSpec, SurfaceGrid

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "DegenerateInputError",
    "GridSpec",
    "JointPMF",
    "RateTriple",
    "SamplingError",
    "SurfaceGrid",
    "__version__",
]

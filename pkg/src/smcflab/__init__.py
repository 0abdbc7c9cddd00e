"""Numerical laboratory for symplectic mean curvature flow in complex space forms.

Modules: ``ambient`` (chart metric and curvature), ``frames`` (adapted frames),
``sff`` (second fundamental form algebra), ``pinching`` (pinching quantities and
thresholds), ``surface`` (grid patches), ``flow`` (time stepping, residuals,
monitors), ``suites`` (randomized oracles), ``config`` and ``cli``.
"""

from . import ambient, errors, flow, frames, pinching, sff, suites, surface
from .errors import SmcfError
from .flow import FlowConfig, monitors, run
from .pinching import PinchingSpec
from .surface import SurfaceConfig, build_surface, diagnostics

__version__ = "0.1.0"

__all__ = [
    "ambient", "errors", "flow", "frames", "pinching", "sff", "suites", "surface",
    "SmcfError", "FlowConfig", "monitors", "run", "PinchingSpec", "SurfaceConfig",
    "build_surface", "diagnostics", "__version__",
]

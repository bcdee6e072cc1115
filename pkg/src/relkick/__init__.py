"""Classical and quantum dynamics of a delta-kicked relativistic particle in a 1D box."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    KickAmplitudeMode,
    ParameterError,
    PhysicalParams,
    RunConfig,
    kick_amplitude,
    validate,
)
from .dirac_box import Basis, EigenMode, mode  # noqa: E402
from .kicked_dirac import (  # noqa: E402
    GaussianPacketSpec,
    KickOperator,
    PhaseMode,
    QuantumState,
    kick_matrix,
)

__all__ = [
    "Basis",
    "EigenMode",
    "GaussianPacketSpec",
    "KickAmplitudeMode",
    "KickOperator",
    "ParameterError",
    "PhaseMode",
    "PhysicalParams",
    "QuantumState",
    "RunConfig",
    "kick_amplitude",
    "kick_matrix",
    "mode",
    "validate",
]

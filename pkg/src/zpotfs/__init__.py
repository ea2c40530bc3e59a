"""ZP-OTFS link simulator with Zadoff-Chu pilots, two-step OMP estimation and MRC detection."""

__version__ = "0.1.0"

from .grid import GridParams, dzt, idzt  # noqa: E402
from .frame import PilotConfig, assemble_frame  # noqa: E402
from .channel import apply_channel, generate_eva_jakes  # noqa: E402
from .receiver import ReceiverConfig, run_receiver  # noqa: E402

__all__ = [
    "GridParams",
    "PilotConfig",
    "ReceiverConfig",
    "apply_channel",
    "assemble_frame",
    "dzt",
    "generate_eva_jakes",
    "idzt",
    "run_receiver",
]

from .app import create_app
from .protocol import (
    ArmCommand,
    CameraMeta,
    ErrorMessage,
    Hello,
    ObjectState,
    StateFrame,
    TeleopCommand,
    decode_raster,
    encode_raster,
)
from .session import TeleopSession

__all__ = [
    "ArmCommand",
    "CameraMeta",
    "ErrorMessage",
    "Hello",
    "ObjectState",
    "StateFrame",
    "TeleopCommand",
    "TeleopSession",
    "create_app",
    "decode_raster",
    "encode_raster",
]

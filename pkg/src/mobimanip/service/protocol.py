"""Wire protocol for the teleoperation session.

Every message is one JSON text frame on a persistent WebSocket.  Client to
server: TeleopCommand.  Server to client: Hello once at session start, then
one StateFrame per control tick, with ErrorMessage interleaved when a client
message is rejected.

Units: linear velocity m/s, angular velocity rad/s, end-effector deltas in
meters per control tick, joint deltas in radians per tick.  The server
clamps every input to the simulator limits; a malformed message never ends
the session.
"""

from __future__ import annotations

import base64

import numpy as np
from pydantic import BaseModel, Field


class ArmCommand(BaseModel):
    """Incremental command for one arm.

    Either an end-effector drag delta (dx, dy) resolved through damped
    least-squares, or direct joint deltas; when both are present the joint
    deltas win.  `grip_toggle` flips the gripper target between open and
    closed.
    """

    dx: float = 0.0
    dy: float = 0.0
    joint_deltas: list[float] | None = None
    grip_toggle: bool = False


class TeleopCommand(BaseModel):
    """One whole-body teleop input sample.

    `seq` is a client-monotone sequence number; the server reports the last
    value it actually applied so clients can measure coalescing.  `record`
    is a transition: true starts a fresh recording (the scene resets),
    false stops and writes the episode file, null leaves recording state
    unchanged.
    """

    seq: int = Field(ge=0)
    v: float = 0.0
    w: float = 0.0
    left: ArmCommand = Field(default_factory=ArmCommand)
    right: ArmCommand = Field(default_factory=ArmCommand)
    record: bool | None = None


class CameraMeta(BaseModel):
    name: str
    h: int
    w: int


class Hello(BaseModel):
    """First server message: session constants."""

    type: str = "hello"
    task: str
    dt: float
    cameras: list[CameraMeta]
    v_max: float
    w_max: float
    n_joints: int
    data_dir: str


class ObjectState(BaseModel):
    name: str
    x: float
    y: float
    radius: float
    attached: str | None = None
    zone: bool = False


class StateFrame(BaseModel):
    """Per-tick server state broadcast.

    `rasters` maps camera name to base64 of the raw row-major uint8 image
    (dimensions from the Hello message).  `subtasks` are the instantaneous
    task predicates, not the first-hit episode accounting.
    """

    type: str = "frame"
    t: int
    seq_applied: int | None
    coalesced: int
    recording: bool
    n_recorded: int
    episode_path: str | None = None
    base_pose: list[float]
    proprio: list[float]
    objects: list[ObjectState]
    subtasks: dict[str, bool]
    rasters: dict[str, str]


class ErrorMessage(BaseModel):
    type: str = "error"
    detail: str


def encode_raster(img: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(img, dtype=np.uint8).tobytes()).decode()


def decode_raster(data: str, h: int, w: int) -> np.ndarray:
    return np.frombuffer(base64.b64decode(data), dtype=np.uint8).reshape(h, w)

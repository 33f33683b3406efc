"""Central configuration objects.

Everything that a caller may reasonably want to override lives here as a
dataclass with defaults.  Modules take the relevant config object as an
argument instead of reading globals, so tests can shrink dimensions freely.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

N_JOINTS = 6
ARM_DIM = 14  # 2 * (6 joints + 1 gripper)
BASE_DIM = 2  # (linear velocity, angular velocity)
ACTION_DIM = ARM_DIM + BASE_DIM
GRIP_DIMS = (N_JOINTS, ARM_DIM - 1)  # gripper columns within an action row


@dataclass(frozen=True)
class SimConfig:
    """Physical constants of the simulated platform."""

    dt: float = 0.02  # 50 Hz control
    n_joints: int = N_JOINTS
    link_length: float = 0.12
    base_radius: float = 0.27
    ee_radius: float = 0.04
    # arm mounts in the base frame; zero-angle chain extends along base +y
    mount_left: tuple[float, float] = (-0.2, 0.25)
    mount_right: tuple[float, float] = (0.2, 0.25)
    mount_angle: float = 1.5707963267948966  # pi / 2
    joint_limit: float = 3.141592653589793
    joint_rate_limit: float = 1.5  # rad/s
    v_max: float = 1.6  # m/s
    w_max: float = 2.0  # rad/s
    grasp_radius: float = 0.14
    gripper_close_threshold: float = 0.5
    # base velocity tracking / disturbance model defaults
    vel_lag_tau: float = 0.1  # s, first-order lag constant
    vel_bias_std: float = 0.05  # per-episode multiplicative bias
    vel_noise_v: float = 0.02  # m/s per-step
    vel_noise_w: float = 0.05  # rad/s per-step


@dataclass(frozen=True)
class CameraConfig:
    """One rendered viewpoint.  `frame` picks what the window tracks."""

    name: str
    size_px: int
    window_m: float
    frame: str  # "base" | "ee_left" | "ee_right" | "world"
    center: tuple[float, float] = (0.0, 0.0)  # used by world-frame cameras


def default_cameras(static: bool = False) -> tuple[CameraConfig, ...]:
    cams = (
        CameraConfig("top", 64, 4.0, "base"),
        CameraConfig("lwrist", 32, 0.6, "ee_left"),
        CameraConfig("rwrist", 32, 0.6, "ee_right"),
    )
    if static:
        cams = cams + (CameraConfig("front", 32, 1.9, "world", (0.0, 0.8)),)
    return cams


@dataclass(frozen=True)
class TrainConfig:
    """Behavior-cloning hyperparameters."""

    chunk_len: int = 45
    batch_size: int = 16
    lr: float = 2e-5
    weight_decay: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    rho_static: float = 0.5
    hidden: int = 256
    trunk: int = 512
    embed: int = 256
    pool_grid: int = 8
    mask_repeated: bool = False  # include repeated chunk tail in the loss
    gripper_weight: float = 1.0  # loss weight on the two gripper columns
    normalize_proprio: bool = True
    divergence_factor: float = 1e3
    seed: int = 0


@dataclass(frozen=True)
class RetrievalConfig:
    """Retrieval policy hyperparameters."""

    chunk_len: int = 100
    k: int = 5
    state_weight: float = 5.0
    camera_weight: float = 1.0
    feature_dim: int = 64
    softmax_weights: bool = True
    # representation training
    enc_lr: float = 3e-4
    enc_weight_decay: float = 1.5e-6
    enc_batch: int = 128
    enc_epochs: int = 100
    enc_momentum: float = 0.9
    seed: int = 0


@dataclass(frozen=True)
class ExecConfig:
    """Action-chunk execution on the real-time loop."""

    chunk_len: int = 45
    base_delay: int = 5  # steps of base-command delay compensated at execution
    # steps consumed per chunk before requerying; None = the full k - d
    # schedule, smaller values trade compute for fresher corrections
    requery_every: int | None = None


def data_dir() -> str:
    """Root directory for episode files; override with MOBIMANIP_DATA_DIR."""
    return os.environ.get("MOBIMANIP_DATA_DIR", os.path.join(os.getcwd(), "data"))


__all__ = [
    "ACTION_DIM",
    "ARM_DIM",
    "BASE_DIM",
    "GRIP_DIMS",
    "N_JOINTS",
    "CameraConfig",
    "ExecConfig",
    "RetrievalConfig",
    "SimConfig",
    "TrainConfig",
    "data_dir",
    "default_cameras",
    "replace",
]

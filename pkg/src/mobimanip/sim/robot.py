"""Robot state, actuation model, and planar arm kinematics.

The platform is a differential-drive base carrying two planar revolute arms.
Arms are position controlled with a per-joint rate limit; the base tracks
commanded (v, w) through a first-order lag plus an episode-constant
multiplicative bias and per-step Gaussian disturbance.

Action layout (16 floats):
    [0:6]   left arm joint targets (rad)
    [6]     left gripper target in [0, 1] (0 = closed)
    [7:13]  right arm joint targets
    [13]    right gripper target
    [14]    base linear velocity command (m/s)
    [15]    base angular velocity command (rad/s)

Proprioception uses the same first 14 entries (measured joints + grippers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..config import ARM_DIM, SimConfig
from .geometry import Pose2D, integrate_unicycle

SIDES = ("left", "right")


class InvalidActionError(ValueError):
    """Raised when an action has the wrong shape or non-finite entries."""


@dataclass
class ArmState:
    joints: np.ndarray  # (n_joints,)
    gripper: float = 1.0  # 1 = open

    def copy(self) -> "ArmState":
        return ArmState(self.joints.copy(), self.gripper)


@dataclass
class RobotState:
    base: Pose2D
    left: ArmState
    right: ArmState
    # base velocity actually tracked by the lag filter, (v, w)
    base_vel: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def arm(self, side: str) -> ArmState:
        return self.left if side == "left" else self.right

    def proprio(self) -> np.ndarray:
        """Measured 14-dim arm vector in action layout order."""
        return np.concatenate(
            [self.left.joints, [self.left.gripper], self.right.joints, [self.right.gripper]]
        )

    def copy(self) -> "RobotState":
        return RobotState(self.base.copy(), self.left.copy(), self.right.copy(), self.base_vel.copy())


def neutral_state(cfg: SimConfig, pose: Pose2D | None = None) -> RobotState:
    """Arms folded in a loose zig-zag, grippers open, base at `pose`."""
    q = np.zeros(cfg.n_joints)
    if cfg.n_joints >= 3:
        q[0], q[1], q[2] = 0.0, 1.1, -1.9
    return RobotState(
        base=pose.copy() if pose is not None else Pose2D(),
        left=ArmState(q.copy()),
        right=ArmState(q.copy()),
    )


@dataclass
class Action:
    """One whole-body command."""

    arm_targets: np.ndarray  # (14,)
    base_cmd: np.ndarray  # (2,): v, w

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "Action":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (ARM_DIM + 2,):
            raise InvalidActionError(f"expected shape ({ARM_DIM + 2},), got {vec.shape}")
        return cls(vec[:ARM_DIM].copy(), vec[ARM_DIM:].copy())

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.arm_targets, self.base_cmd])

    def validate(self) -> None:
        if self.arm_targets.shape != (ARM_DIM,) or self.base_cmd.shape != (2,):
            raise InvalidActionError(
                f"bad action shapes {self.arm_targets.shape}, {self.base_cmd.shape}"
            )
        if not (np.all(np.isfinite(self.arm_targets)) and np.all(np.isfinite(self.base_cmd))):
            raise InvalidActionError("non-finite action entries")


@dataclass
class NoiseModel:
    """Base-velocity disturbance: lag constant, fixed bias, per-step noise.

    With everything zero the base tracks commands exactly, which is what
    replay verification relies on.
    """

    tau: float = 0.0
    bias_v: float = 0.0
    bias_w: float = 0.0
    sigma_v: float = 0.0
    sigma_w: float = 0.0
    rng: np.random.Generator | None = None

    @classmethod
    def zero(cls) -> "NoiseModel":
        return cls()

    @classmethod
    def sampled(cls, cfg: SimConfig, seed: int) -> "NoiseModel":
        """Default disturbance: biases drawn once per episode from `seed`."""
        rng = np.random.default_rng(seed)
        return cls(
            tau=cfg.vel_lag_tau,
            bias_v=float(rng.normal(0.0, cfg.vel_bias_std)),
            bias_w=float(rng.normal(0.0, cfg.vel_bias_std)),
            sigma_v=cfg.vel_noise_v,
            sigma_w=cfg.vel_noise_w,
            rng=rng,
        )


def _track_arm(arm: ArmState, targets: np.ndarray, gripper_target: float, cfg: SimConfig, dt: float) -> ArmState:
    targets = np.clip(targets, -cfg.joint_limit, cfg.joint_limit)
    dq = np.clip(targets - arm.joints, -cfg.joint_rate_limit * dt, cfg.joint_rate_limit * dt)
    g_t = min(max(gripper_target, 0.0), 1.0)
    dg = min(max(g_t - arm.gripper, -cfg.joint_rate_limit * dt), cfg.joint_rate_limit * dt)
    return ArmState(arm.joints + dq, arm.gripper + dg)


def step(
    state: RobotState,
    action: Action,
    cfg: SimConfig,
    noise: NoiseModel | None = None,
    dt: float | None = None,
) -> RobotState:
    """Advance the robot one control period.

    Pure with respect to its inputs apart from `noise.rng`, which is the only
    source of stochasticity; a zero NoiseModel makes the update deterministic
    and exact.
    """
    action.validate()
    noise = noise or NoiseModel.zero()
    dt = cfg.dt if dt is None else dt
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")

    left = _track_arm(state.left, action.arm_targets[:6], action.arm_targets[6], cfg, dt)
    right = _track_arm(state.right, action.arm_targets[7:13], action.arm_targets[13], cfg, dt)

    v_cmd = min(max(float(action.base_cmd[0]), -cfg.v_max), cfg.v_max)
    w_cmd = min(max(float(action.base_cmd[1]), -cfg.w_max), cfg.w_max)
    target = np.array([v_cmd * (1.0 + noise.bias_v), w_cmd * (1.0 + noise.bias_w)])

    if noise.tau > 0.0:
        alpha = 1.0 - math.exp(-dt / noise.tau)
    else:
        alpha = 1.0
    vel = state.base_vel + alpha * (target - state.base_vel)

    actual = vel.copy()
    if noise.rng is not None and (noise.sigma_v > 0.0 or noise.sigma_w > 0.0):
        actual = actual + noise.rng.normal(0.0, 1.0, 2) * np.array([noise.sigma_v, noise.sigma_w])
    actual[0] = min(max(actual[0], -cfg.v_max), cfg.v_max)
    actual[1] = min(max(actual[1], -cfg.w_max), cfg.w_max)

    base = integrate_unicycle(state.base, float(actual[0]), float(actual[1]), dt)
    return RobotState(base=base, left=left, right=right, base_vel=vel)


# --- kinematics ---------------------------------------------------------


def _mount(cfg: SimConfig, side: str) -> np.ndarray:
    return np.array(cfg.mount_left if side == "left" else cfg.mount_right)


def fk_points(base: Pose2D, joints: np.ndarray, cfg: SimConfig, side: str) -> np.ndarray:
    """World positions of the arm chain: mount plus one point per link end.

    Returns an (n_joints + 1, 2) array; the last row is the end effector.
    """
    pts = np.empty((len(joints) + 1, 2))
    pts[0] = base.to_world(_mount(cfg, side))
    ang = base.theta + cfg.mount_angle
    for i, q in enumerate(joints):
        ang += q
        pts[i + 1] = pts[i] + cfg.link_length * np.array([math.cos(ang), math.sin(ang)])
    return pts


def fk_ee(base: Pose2D, joints: np.ndarray, cfg: SimConfig, side: str) -> np.ndarray:
    return fk_points(base, joints, cfg, side)[-1]


def ee_angle(base: Pose2D, joints: np.ndarray, cfg: SimConfig) -> float:
    """World orientation of the last link."""
    return base.theta + cfg.mount_angle + float(np.sum(joints))


def jacobian(base: Pose2D, joints: np.ndarray, cfg: SimConfig, side: str) -> np.ndarray:
    """Positional Jacobian d(ee)/d(joints), shape (2, n_joints)."""
    pts = fk_points(base, joints, cfg, side)
    ee = pts[-1]
    jac = np.empty((2, len(joints)))
    for i in range(len(joints)):
        r = ee - pts[i]
        jac[0, i] = -r[1]
        jac[1, i] = r[0]
    return jac


def ik_step(
    base: Pose2D,
    joints: np.ndarray,
    target: np.ndarray,
    cfg: SimConfig,
    side: str,
    damping: float = 0.05,
    gain: float = 1.0,
) -> np.ndarray:
    """One damped-least-squares update toward a world-frame target.

    Returns new joint values clipped to the joint limits.  Iterating this to
    convergence is a complete solver; a single call per control step gives a
    smooth closed-loop servo.
    """
    err = np.asarray(target, dtype=float) - fk_ee(base, joints, cfg, side)
    jac = jacobian(base, joints, cfg, side)
    a = jac @ jac.T + (damping**2) * np.eye(2)
    dq = jac.T @ np.linalg.solve(a, gain * err)
    return np.clip(joints + dq, -cfg.joint_limit, cfg.joint_limit)


def ik_solve(
    base: Pose2D,
    joints: np.ndarray,
    target: np.ndarray,
    cfg: SimConfig,
    side: str,
    iters: int = 100,
    tol: float = 1e-4,
    restarts: int = 6,
) -> tuple[np.ndarray, bool]:
    """Iterated DLS with deterministic restarts; returns (joints, converged).

    The first attempt starts from `joints`; later attempts reseed from a
    fixed-seed draw so results stay reproducible.
    """
    q0 = np.asarray(joints, dtype=float).copy()
    rng = np.random.default_rng(0)
    best_q, best_err = q0, float("inf")
    for attempt in range(restarts):
        q = q0 if attempt == 0 else rng.uniform(-1.8, 1.8, len(q0))
        for _ in range(iters):
            q = ik_step(base, q, target, cfg, side)
            err = float(np.linalg.norm(fk_ee(base, q, cfg, side) - target))
            if err < tol:
                return q, True
        if err < best_err:
            best_q, best_err = q, err
    return best_q, False

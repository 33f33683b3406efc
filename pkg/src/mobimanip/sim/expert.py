"""Scripted demonstrator: waypoint programs executed closed-loop.

The expert drives the base with a proportional go-to-pose controller (it will
reverse when the target is behind it), servos end effectors toward world
targets with one damped-least-squares step per tick, and ramps grippers.
Commanded arm targets stay within the simulator's tracking rate so recorded
actions are smooth.  A waypoint that does not converge within its timeout
marks the episode failed; the expert then holds still instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..config import SimConfig
from .geometry import wrap_angle
from .robot import Action, RobotState, fk_ee, ik_step
from .world import WorldState

K_V = 1.8
K_W = 3.0
V_CRUISE = 0.9
W_CRUISE = 1.4
ARM_SPEED = 1.2  # rad/s, below the simulator's 1.5 tracking limit
GRIP_SPEED = 1.5


@dataclass
class Waypoint:
    label: str
    base_xy: np.ndarray | None = None
    base_heading: float | None = None
    ee: dict[str, np.ndarray] = field(default_factory=dict)
    arm_joints: dict[str, np.ndarray] = field(default_factory=dict)
    grip: dict[str, float] = field(default_factory=dict)
    base_tol: float = 0.05
    heading_tol: float = 0.12
    ee_tol: float = 0.02
    joint_tol: float = 0.05
    grip_tol: float = 0.08
    arm_scale: float = 1.0  # fraction of ARM_SPEED; slow approaches near contact
    timeout: int = 500
    dwell: int = 0  # steps to keep holding the pose after tolerances are met


class ScriptedExpert:
    def __init__(
        self,
        program: list[Waypoint],
        cfg: SimConfig,
        static: bool = False,
        seed: int = 0,
        explore_base: float = 0.0,
        explore_arm: float = 0.0,
    ):
        self.program = program
        self.cfg = cfg
        self.static = static
        self.rng = np.random.default_rng(seed)
        self.explore_base = explore_base
        self.explore_arm = explore_arm
        self.idx = 0
        self.steps_in_wp = 0
        self.failed = False
        self.grip_targets = {"left": 1.0, "right": 1.0}

    @property
    def done(self) -> bool:
        return self.idx >= len(self.program)

    def _satisfied(self, wp: Waypoint, robot: RobotState) -> bool:
        cfg = self.cfg
        if wp.base_xy is not None:
            if float(np.linalg.norm(robot.base.xy - wp.base_xy)) > wp.base_tol:
                return False
            if wp.base_heading is not None:
                if abs(wrap_angle(wp.base_heading - robot.base.theta)) > wp.heading_tol:
                    return False
        for side, tgt in wp.ee.items():
            ee = fk_ee(robot.base, robot.arm(side).joints, cfg, side)
            if float(np.linalg.norm(ee - tgt)) > wp.ee_tol:
                return False
        for side, q in wp.arm_joints.items():
            if float(np.max(np.abs(robot.arm(side).joints - q))) > wp.joint_tol:
                return False
        for side, g in wp.grip.items():
            if abs(robot.arm(side).gripper - g) > wp.grip_tol:
                return False
        return True

    def _base_cmd(self, wp: Waypoint, robot: RobotState) -> tuple[float, float]:
        if self.static or wp.base_xy is None:
            return 0.0, 0.0
        delta = wp.base_xy - robot.base.xy
        dist = float(np.linalg.norm(delta))
        if dist > wp.base_tol:
            err = wrap_angle(math.atan2(delta[1], delta[0]) - robot.base.theta)
            sign = 1.0
            if abs(err) > math.pi / 2.0:
                # target behind: drive in reverse
                err = wrap_angle(err - math.pi)
                sign = -1.0
            v = sign * min(K_V * dist, V_CRUISE) * max(math.cos(err), 0.0)
            w = max(-W_CRUISE, min(K_W * err, W_CRUISE))
            return v, w
        if wp.base_heading is not None:
            err = wrap_angle(wp.base_heading - robot.base.theta)
            return 0.0, max(-W_CRUISE, min(K_W * err, W_CRUISE))
        return 0.0, 0.0

    def act(self, robot: RobotState, world: WorldState) -> Action:
        cfg = self.cfg
        dt = cfg.dt
        while (
            not self.done
            and self._satisfied(self.program[self.idx], robot)
            and self.steps_in_wp >= self.program[self.idx].dwell
        ):
            self.idx += 1
            self.steps_in_wp = 0

        arms = np.concatenate(
            [robot.left.joints, [self.grip_targets["left"]], robot.right.joints, [self.grip_targets["right"]]]
        )
        if self.done:
            return Action(arms, np.zeros(2))

        wp = self.program[self.idx]
        self.steps_in_wp += 1
        if self.steps_in_wp > wp.timeout:
            self.failed = True
            self.idx = len(self.program)
            return Action(arms, np.zeros(2))

        for side, offset in (("left", 0), ("right", 7)):
            q = robot.arm(side).joints
            if side in wp.ee:
                q_new = ik_step(robot.base, q, wp.ee[side], cfg, side)
                dq = q_new - q
            elif side in wp.arm_joints:
                dq = wp.arm_joints[side] - q
            else:
                dq = np.zeros_like(q)
            step_mag = float(np.max(np.abs(dq)))
            limit = ARM_SPEED * wp.arm_scale * dt
            if step_mag > limit:
                dq = dq * (limit / step_mag)
            cmd = q + dq
            if self.explore_arm > 0.0:
                cmd = cmd + self.rng.normal(0.0, self.explore_arm, len(q))
            arms[offset : offset + len(q)] = cmd
            if side in wp.grip:
                self.grip_targets[side] = wp.grip[side]
            g = robot.arm(side).gripper
            g_tgt = self.grip_targets[side]
            dg = max(-GRIP_SPEED * dt, min(g_tgt - g, GRIP_SPEED * dt))
            arms[offset + 6] = g + dg

        v, w = self._base_cmd(wp, robot)
        if self.explore_base > 0.0:
            v += self.rng.normal(0.0, self.explore_base)
            w += self.rng.normal(0.0, 1.5 * self.explore_base)
        return Action(arms, np.array([v, w]))

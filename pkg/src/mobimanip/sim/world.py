"""World objects, contact rules, and the stepped simulator.

Contact handling is deliberately simple: objects are discs, grasping snaps a
graspable disc to the end effector while the gripper is closed, and pushable
discs are displaced out of overlap with the base disc or either end effector.
Status flags are latched by task-specific update hooks and only ever go from
False to True within an episode.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Callable

import numpy as np

from ..config import SimConfig, default_cameras
from .geometry import Pose2D
from .render import render_view
from .robot import Action, NoiseModel, RobotState, fk_ee, neutral_state, step

if TYPE_CHECKING:
    from .tasks import TaskSpec


@dataclass
class WorldObject:
    name: str
    pos: np.ndarray  # (2,) world frame
    radius: float
    color: int  # gray value used by the renderer
    graspable: bool = False
    pushable: bool = False
    zone: bool = False  # drawn only, no contact
    attached: str | None = None  # "left" / "right" while held

    def copy(self) -> "WorldObject":
        return replace(self, pos=self.pos.copy())


@dataclass
class WorldState:
    objects: dict[str, WorldObject]
    status: dict[str, bool] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def copy(self) -> "WorldState":
        return WorldState(
            {k: o.copy() for k, o in self.objects.items()},
            dict(self.status),
            dict(self.meta),
        )


@dataclass
class Observation:
    rasters: dict[str, np.ndarray]
    proprio: np.ndarray  # (14,)
    base_pose: np.ndarray  # (3,) x, y, theta
    t: int


def _resolve_push(world: WorldState, center: np.ndarray, radius: float) -> None:
    for obj in world.objects.values():
        if not obj.pushable or obj.zone or obj.attached is not None:
            continue
        d = obj.pos - center
        dist = float(np.linalg.norm(d))
        min_dist = radius + obj.radius
        if dist < min_dist:
            if dist < 1e-9:
                d = np.array([0.0, 1.0])
                dist = 1.0
            obj.pos = center + d * (min_dist / dist)


class Simulator:
    """One episode of one task.

    All randomness (scene layout, actuation disturbance) derives from the
    constructor seed, so two simulators built with identical arguments and
    fed identical actions produce identical trajectories.
    """

    def __init__(
        self,
        task: "TaskSpec",
        cfg: SimConfig | None = None,
        seed: int = 0,
        noise: NoiseModel | None = None,
    ):
        self.cfg = cfg or SimConfig()
        self.task = task
        self.seed = seed
        ss = np.random.SeedSequence(seed)
        scene_seed, noise_seed = ss.spawn(2)
        rng = np.random.default_rng(scene_seed)
        self.world = task.build(rng, self.cfg)
        if noise is not None:
            self.noise = noise
        elif task.static:
            self.noise = NoiseModel.zero()
        else:
            self.noise = NoiseModel.sampled(self.cfg, noise_seed)
        self.robot = task.initial_robot(self.world, self.cfg) if task.initial_robot else neutral_state(self.cfg)
        self.cameras = task.cameras or default_cameras(task.static)
        self.t = 0

    def step(self, action: Action) -> None:
        if self.task.static:
            action = Action(action.arm_targets, np.zeros(2))
        self.robot = step(self.robot, action, self.cfg, self.noise)
        self._update_contacts()
        if self.task.update_status is not None:
            self.task.update_status(self.world, self.robot, self.cfg)
        self.t += 1

    def _update_contacts(self) -> None:
        cfg = self.cfg
        for side in ("left", "right"):
            arm = self.robot.arm(side)
            ee = fk_ee(self.robot.base, arm.joints, cfg, side)
            held = next((o for o in self.world.objects.values() if o.attached == side), None)
            if arm.gripper < cfg.gripper_close_threshold:
                if held is None:
                    cands = [
                        o
                        for o in self.world.objects.values()
                        if o.graspable and o.attached is None
                        and np.linalg.norm(o.pos - ee) <= cfg.grasp_radius
                    ]
                    if cands:
                        cands.sort(key=lambda o: (float(np.linalg.norm(o.pos - ee)), o.name))
                        cands[0].attached = side
                        cands[0].pos = ee.copy()
                else:
                    held.pos = ee.copy()
            elif held is not None:
                held.attached = None
        _resolve_push(self.world, self.robot.base.xy, cfg.base_radius)
        for side in ("left", "right"):
            ee = fk_ee(self.robot.base, self.robot.arm(side).joints, cfg, side)
            _resolve_push(self.world, ee, cfg.ee_radius)

    def observe(self) -> Observation:
        rasters = {
            cam.name: render_view(self.world, self.robot, self.cfg, cam) for cam in self.cameras
        }
        return Observation(
            rasters=rasters,
            proprio=self.robot.proprio(),
            base_pose=np.array([self.robot.base.x, self.robot.base.y, self.robot.base.theta]),
            t=self.t,
        )

    def snapshot(self) -> WorldState:
        return self.world.copy()

"""Transport-independent teleop session.

A session owns one simulator and is advanced by a single caller at the
control rate: `submit` queues a client command, `tick` applies the oldest
queued command and steps the sim once.  The queue is a few entries deep so
that a client pacing itself at the control rate never loses a command to
scheduling jitter; when commands arrive faster than ticks the oldest is
dropped and counted in `coalesced` (gripper toggles and record transitions
are accumulated at submit time, so they survive the drop).

Sessions run the simulator without actuation disturbance so that a recorded
episode replays exactly from its commands; the disturbance model is a
property of scripted collection and evaluation, not of demonstration.
Recording always starts from a freshly seeded scene, which is what makes
the episode reproducible from its header alone.
"""

from __future__ import annotations

import math
import os
import time
from collections import deque

import numpy as np

from ..bench.rollout import Trace
from ..bench.success import evaluate_subtasks
from ..config import SimConfig, data_dir as default_data_dir
from ..data.collect import trace_to_episode
from ..data.episode import write_episode
from ..sim.robot import Action, NoiseModel, fk_ee, ik_step
from ..sim.tasks import get_task
from ..sim.world import Simulator
from .protocol import (
    ArmCommand,
    CameraMeta,
    Hello,
    ObjectState,
    StateFrame,
    TeleopCommand,
    encode_raster,
)

MAX_EE_STEP = 0.05  # m per tick, before joint-rate limiting in the sim
QUEUE_DEPTH = 3  # commands buffered; covers client/server phase jitter at equal rates


def _finite(x: float) -> float:
    return float(x) if math.isfinite(x) else 0.0


class TeleopSession:
    def __init__(
        self,
        task_name: str,
        cfg: SimConfig | None = None,
        seed0: int | None = None,
        data_dir: str | None = None,
    ):
        self.task = get_task(task_name)
        self.cfg = cfg or SimConfig()
        self.data_dir = data_dir or default_data_dir()
        self.seed = int(time.time()) % 100000 if seed0 is None else seed0
        self.coalesced = 0
        self.seq_applied: int | None = None
        self.episode_path: str | None = None
        self._queue: deque[TeleopCommand] = deque()
        self._toggles = {"left": 0, "right": 0}
        self._record_request: bool | None = None
        self._recording = False
        self._reset_sim(self.seed)

    def _reset_sim(self, seed: int) -> None:
        self.sim = Simulator(self.task, cfg=self.cfg, seed=seed, noise=NoiseModel.zero())
        self._grip_targets = {
            s: float(self.sim.robot.arm(s).gripper) for s in ("left", "right")
        }
        self._joint_targets = {
            s: self.sim.robot.arm(s).joints.copy() for s in ("left", "right")
        }
        self._trace_obs: list[dict] = []
        self._trace_actions: list[np.ndarray] = []
        self._trace_proprio: list[np.ndarray] = []
        self._trace_poses: list[np.ndarray] = []
        self._trace_snaps = [self.sim.snapshot()]
        self._last_obs = self.sim.observe()

    # -- client side ----------------------------------------------------

    def submit(self, cmd: TeleopCommand) -> None:
        """Queue a command; transitions accumulate even if it is later dropped."""
        for side in ("left", "right"):
            if getattr(cmd, side).grip_toggle:
                self._toggles[side] += 1
        if cmd.record is not None:
            self._record_request = cmd.record
        if len(self._queue) >= QUEUE_DEPTH:
            self._queue.popleft()
            self.coalesced += 1
        self._queue.append(cmd)

    def hello(self) -> Hello:
        cams = self.sim.cameras
        return Hello(
            task=self.task.name,
            dt=self.cfg.dt,
            cameras=[CameraMeta(name=c.name, h=c.size_px, w=c.size_px) for c in cams],
            v_max=self.cfg.v_max,
            w_max=self.cfg.w_max,
            n_joints=self.cfg.n_joints,
            data_dir=self.data_dir,
        )

    # -- control loop ---------------------------------------------------

    def _arm_target(self, side: str, arm_cmd: ArmCommand) -> None:
        cfg = self.cfg
        joints = self.sim.robot.arm(side).joints
        if arm_cmd.joint_deltas is not None:
            d = np.zeros(cfg.n_joints)
            k = min(len(arm_cmd.joint_deltas), cfg.n_joints)
            d[:k] = [_finite(x) for x in arm_cmd.joint_deltas[:k]]
            self._joint_targets[side] = np.clip(
                joints + d, -cfg.joint_limit, cfg.joint_limit
            )
        elif arm_cmd.dx or arm_cmd.dy:
            delta = np.array([_finite(arm_cmd.dx), _finite(arm_cmd.dy)])
            n = float(np.linalg.norm(delta))
            if n > MAX_EE_STEP:
                delta *= MAX_EE_STEP / n
            target = fk_ee(self.sim.robot.base, joints, cfg, side) + delta
            self._joint_targets[side] = ik_step(
                self.sim.robot.base, joints, target, cfg, side
            )

    def tick(self) -> None:
        """Apply the oldest queued command (if any) and advance the sim one step."""
        if self._record_request is not None:
            want = self._record_request
            self._record_request = None
            if want and not self._recording:
                self.seed += 1
                self._reset_sim(self.seed)
                self._recording = True
                self.episode_path = None
            elif not want and self._recording:
                self.episode_path = self._write_recording()
                self._recording = False
        cmd = self._queue.popleft() if self._queue else None
        v = w = 0.0
        if cmd is not None:
            self.seq_applied = cmd.seq
            v = float(np.clip(_finite(cmd.v), -self.cfg.v_max, self.cfg.v_max))
            w = float(np.clip(_finite(cmd.w), -self.cfg.w_max, self.cfg.w_max))
            for side in ("left", "right"):
                self._arm_target(side, getattr(cmd, side))
        for side in ("left", "right"):
            if self._toggles[side] % 2:
                g = self._grip_targets[side]
                self._grip_targets[side] = 0.0 if g >= 0.5 else 1.0
            self._toggles[side] = 0
        arm_vec = np.concatenate(
            [
                self._joint_targets["left"],
                [self._grip_targets["left"]],
                self._joint_targets["right"],
                [self._grip_targets["right"]],
            ]
        )
        action = Action(arm_vec, np.array([v, w]))
        obs = self._last_obs
        if self._recording:
            self._trace_obs.append(obs.rasters)
            self._trace_actions.append(action.to_vector())
            self._trace_proprio.append(obs.proprio)
            self._trace_poses.append(obs.base_pose)
        self.sim.step(action)
        if self._recording:
            self._trace_snaps.append(self.sim.snapshot())
        self._last_obs = self.sim.observe()

    def _write_recording(self) -> str | None:
        if not self._trace_actions:
            return None
        trace = Trace(
            snaps=self._trace_snaps,
            actions=np.asarray(self._trace_actions),
            proprio=np.asarray(self._trace_proprio),
            base_pose=np.asarray(self._trace_poses),
            obs=self._trace_obs,
        )
        outcomes = evaluate_subtasks(trace.snaps, self.task)
        episode = trace_to_episode(trace, self.task, self.cfg, self.seed, outcomes)
        os.makedirs(self.data_dir, exist_ok=True)
        path = os.path.join(
            self.data_dir, f"teleop_{self.task.name}_{self.seed:05d}.maep"
        )
        write_episode(path, episode)
        return path

    def finalize(self) -> str | None:
        """Stop an in-flight recording at the last complete step."""
        if self._recording:
            self.episode_path = self._write_recording()
            self._recording = False
        return self.episode_path

    def frame(self) -> StateFrame:
        obs = self._last_obs
        world = self.sim.world
        return StateFrame(
            t=self.sim.t,
            seq_applied=self.seq_applied,
            coalesced=self.coalesced,
            recording=self._recording,
            n_recorded=len(self._trace_actions),
            episode_path=self.episode_path,
            base_pose=[float(x) for x in obs.base_pose],
            proprio=[float(x) for x in obs.proprio],
            objects=[
                ObjectState(
                    name=o.name,
                    x=float(o.pos[0]),
                    y=float(o.pos[1]),
                    radius=float(o.radius),
                    attached=o.attached,
                    zone=o.zone,
                )
                for o in world.objects.values()
            ],
            subtasks={name: bool(pred(world)) for name, pred in self.task.sub_tasks},
            rasters={name: encode_raster(img) for name, img in obs.rasters.items()},
        )

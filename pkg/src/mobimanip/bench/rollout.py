"""Episode rollout shared by data collection and policy evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..sim.expert import ScriptedExpert
from ..sim.robot import Action
from ..sim.world import Observation, Simulator, WorldState


@dataclass
class Trace:
    """Everything recorded while stepping one episode.

    ``snaps[i]`` is the world before step ``i``; one extra snapshot is
    appended after the final step so latched outcomes are visible.
    """

    snaps: list[WorldState]
    actions: np.ndarray  # (T, 16)
    proprio: np.ndarray  # (T, 14)
    base_pose: np.ndarray  # (T, 3)
    obs: list[dict] | None = None  # per-step rasters when requested
    info: dict = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return len(self.actions)


def run_episode(
    sim: Simulator,
    actor: Callable[[Observation, Simulator], Action],
    horizon: int | None = None,
    record_obs: bool = False,
    stop: Callable[[], bool] | None = None,
    settle: int = 5,
) -> Trace:
    """Step `sim` under `actor` until the horizon or `stop()` plus settling."""
    horizon = horizon if horizon is not None else sim.task.horizon
    snaps = [sim.snapshot()]
    actions, proprio, poses, obs_list = [], [], [], []
    remaining_settle = None
    for _ in range(horizon):
        obs = sim.observe()
        act = actor(obs, sim)
        if record_obs:
            obs_list.append(obs.rasters)
        actions.append(act.to_vector())
        proprio.append(obs.proprio)
        poses.append(obs.base_pose)
        sim.step(act)
        snaps.append(sim.snapshot())
        if stop is not None and remaining_settle is None and stop():
            remaining_settle = settle
        if remaining_settle is not None:
            remaining_settle -= 1
            if remaining_settle <= 0:
                break
    return Trace(
        snaps=snaps,
        actions=np.asarray(actions),
        proprio=np.asarray(proprio),
        base_pose=np.asarray(poses),
        obs=obs_list if record_obs else None,
    )


def make_expert_actor(
    sim: Simulator, seed: int = 0, explore_base: float = 0.02, explore_arm: float = 0.002
) -> tuple[Callable, ScriptedExpert]:
    expert = ScriptedExpert(
        sim.task.expert_program(sim.world, sim.cfg),
        sim.cfg,
        static=sim.task.static,
        seed=seed,
        explore_base=explore_base,
        explore_arm=explore_arm,
    )

    def actor(obs: Observation, s: Simulator) -> Action:
        return expert.act(s.robot, s.world)

    return actor, expert

"""Scripted-expert demonstration collection.

Episodes store the commanded actions (arm targets and base velocities), so a
zero-disturbance replay of the recorded commands reproduces the trajectory
exactly.  Only episodes whose every sub-task succeeds are kept; scenes that
defeat the expert are skipped and replaced by further seeds.
"""

from __future__ import annotations

import logging
import os

import numpy as np

from ..bench.rollout import Trace, make_expert_actor, run_episode
from ..bench.success import evaluate_subtasks
from ..config import ARM_DIM, SimConfig
from ..sim.tasks import TaskSpec, get_task
from ..sim.world import Simulator
from .corpus import Corpus
from .episode import Episode, load_episode, write_episode

log = logging.getLogger(__name__)


def trace_to_episode(trace: Trace, task: TaskSpec, cfg: SimConfig, seed: int, outcomes) -> Episode:
    if trace.obs is None:
        raise ValueError("trace was recorded without observations")
    cams = [
        {"name": name, "h": r.shape[0], "w": r.shape[1]} for name, r in trace.obs[0].items()
    ]
    t = trace.n_steps
    rasters = {
        c["name"]: np.stack([o[c["name"]] for o in trace.obs]).astype(np.uint8) for c in cams
    }
    header = {
        "task": task.name,
        "origin": "static" if task.static else "mobile",
        "n_steps": t,
        "dt": cfg.dt,
        "base_dims": task.base_dims,
        "cameras": cams,
        "seed": seed,
        "subtasks": {name: bool(out) for (name, _), out in zip(task.sub_tasks, outcomes)},
    }
    return Episode(
        header=header,
        proprio=trace.proprio.astype(np.float32),
        base_pose=trace.base_pose.astype(np.float32),
        action_arms=trace.actions[:, :ARM_DIM].astype(np.float32),
        action_base=trace.actions[:, ARM_DIM : ARM_DIM + task.base_dims].astype(np.float32),
        rasters=rasters,
    )


def collect_demos(
    task_name: str,
    n: int,
    out_dir: str,
    seed: int = 0,
    cfg: SimConfig | None = None,
    explore_base: float = 0.04,
    explore_arm: float = 0.006,
    manifest: str | None = None,
) -> Corpus:
    cfg = cfg or SimConfig()
    task = get_task(task_name)
    os.makedirs(out_dir, exist_ok=True)
    kept: list[str] = []
    attempt = 0
    while len(kept) < n:
        if attempt >= 3 * n:
            raise RuntimeError(f"{task_name}: expert kept failing ({len(kept)}/{n} after {attempt} tries)")
        ep_seed = seed + attempt
        attempt += 1
        sim = Simulator(task, cfg=cfg, seed=ep_seed)
        actor, expert = make_expert_actor(
            sim, seed=ep_seed, explore_base=explore_base, explore_arm=explore_arm
        )
        trace = run_episode(sim, actor, record_obs=True, stop=lambda: expert.done)
        outcomes = evaluate_subtasks(trace.snaps, task)
        if expert.failed or not all(o is True for o in outcomes):
            log.info("%s seed %d failed, skipping", task_name, ep_seed)
            continue
        path = os.path.join(out_dir, f"{task_name}_{ep_seed:05d}.maep")
        write_episode(path, trace_to_episode(trace, task, cfg, ep_seed, outcomes))
        kept.append(path)
    corpus = Corpus([load_episode(p) for p in kept])
    if manifest:
        corpus.write_manifest(manifest)
    return corpus


def ensure_demos(task_name: str, n: int, out_dir: str, seed: int = 0, **kw) -> Corpus:
    """Idempotent collection: reuse `out_dir` when it already holds >= n
    episodes, otherwise collect from scratch."""
    if os.path.isdir(out_dir):
        have = Corpus.from_dir(out_dir)
        if len(have) >= n:
            return have.subset(n)
    return collect_demos(task_name, n, out_dir, seed=seed, **kw)

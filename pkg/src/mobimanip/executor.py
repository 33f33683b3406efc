"""Delay-compensated execution of predicted action chunks.

A policy emits chunks of k whole-body actions, but base commands take
effect after roughly d control periods of actuation latency.  To keep arm
and base aligned in time, one chunk yields k - d combined steps: step i
pairs arm row i with base row i + d, so the arms execute the first k - d
arm actions while the base executes the last k - d base actions.  When the
schedule is exhausted the policy is queried again on the fresh observation;
`requery_every` can cut the schedule short to requery more often.
"""

from __future__ import annotations

import numpy as np

from .config import ARM_DIM, ExecConfig
from .sim.robot import Action


class ChunkExecutor:
    def __init__(self, policy, cfg: ExecConfig | None = None):
        cfg = cfg or ExecConfig()
        k = getattr(policy, "chunk_len", cfg.chunk_len)
        d = cfg.base_delay
        if not 0 <= d < k:
            raise ValueError(f"need 0 <= delay < chunk length, got d={d}, k={k}")
        self.policy = policy
        self.k = k
        self.d = d
        if cfg.requery_every is not None and not 1 <= cfg.requery_every <= k - d:
            raise ValueError(f"requery_every must be in [1, k - d], got {cfg.requery_every}")
        self.requery_every = cfg.requery_every
        self.reset()

    def reset(self) -> None:
        self._schedule: np.ndarray | None = None
        self._pos = 0
        self.queries = 0

    @property
    def steps_per_chunk(self) -> int:
        return self.k - self.d

    def act(self, obs) -> np.ndarray:
        """Next 16-dim action, querying the policy when the schedule runs out."""
        limit = self.requery_every or (self.k - self.d)
        if self._schedule is None or self._pos >= min(len(self._schedule), limit):
            chunk = np.asarray(self.policy.predict(obs), dtype=np.float64)
            if chunk.shape != (self.k, ARM_DIM + 2):
                raise ValueError(f"policy returned chunk {chunk.shape}, expected {(self.k, ARM_DIM + 2)}")
            n = self.k - self.d
            sched = np.empty((n, ARM_DIM + 2))
            sched[:, :ARM_DIM] = chunk[:n, :ARM_DIM]
            sched[:, ARM_DIM:] = chunk[self.d :, ARM_DIM:]
            self._schedule = sched
            self._pos = 0
            self.queries += 1
        a = self._schedule[self._pos]
        self._pos += 1
        return a.copy()


def make_policy_actor(policy, cfg: ExecConfig | None = None):
    """(actor, executor) pair for run_episode."""
    ex = ChunkExecutor(policy, cfg)

    def actor(obs, sim) -> Action:
        return Action.from_vector(ex.act(obs))

    return actor, ex

"""Action and proprioception normalization statistics.

Statistics come from mobile episodes only; passing a static episode in is an
error rather than a silent skip.  Standard deviations are population
(ddof 0) with a 1e-6 floor.

Normalization is written as x/std - mean/std instead of (x - mean)/std: with
c = mean/std precomputed, a zero action maps to exactly -c and back to
exactly 0.0, so zero-padded base labels survive the round trip bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..config import ACTION_DIM, ARM_DIM

STD_FLOOR = 1e-6


@dataclass
class NormStats:
    action_mean: np.ndarray  # (16,)
    action_std: np.ndarray  # (16,)
    proprio_mean: np.ndarray  # (14,)
    proprio_std: np.ndarray  # (14,)

    def __post_init__(self):
        self._ca = self.action_mean / self.action_std
        self._cp = self.proprio_mean / self.proprio_std

    def normalize_action(self, a: np.ndarray) -> np.ndarray:
        return a / self.action_std - self._ca

    def denormalize_action(self, x: np.ndarray) -> np.ndarray:
        return (x + self._ca) * self.action_std

    def normalize_proprio(self, p: np.ndarray) -> np.ndarray:
        return p / self.proprio_std - self._cp

    def to_json(self) -> str:
        return json.dumps(
            {
                "action_mean": self.action_mean.tolist(),
                "action_std": self.action_std.tolist(),
                "proprio_mean": self.proprio_mean.tolist(),
                "proprio_std": self.proprio_std.tolist(),
            }
        )

    @classmethod
    def from_json(cls, blob: str) -> "NormStats":
        d = json.loads(blob)
        return cls(*(np.asarray(d[k]) for k in ("action_mean", "action_std", "proprio_mean", "proprio_std")))

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            f.write(self.to_json())

    @classmethod
    def load(cls, path: str) -> "NormStats":
        with open(path) as f:
            return cls.from_json(f.read())


def compute_norm_stats(episodes) -> NormStats:
    """Population mean/std over every step of the given mobile episodes."""
    eps = getattr(episodes, "episodes", episodes)
    if not eps:
        raise ValueError("no episodes given")
    bad = [e.path or e.header.get("task") for e in eps if e.origin != "mobile"]
    if bad:
        raise ValueError(f"normalization requires mobile episodes only, got static: {bad[:3]}")
    actions = np.concatenate([e.actions() for e in eps], axis=0)
    proprio = np.concatenate([np.asarray(e.proprio, dtype=np.float64) for e in eps], axis=0)
    assert actions.shape[1] == ACTION_DIM and proprio.shape[1] == ARM_DIM
    return NormStats(
        action_mean=actions.mean(axis=0),
        action_std=np.maximum(actions.std(axis=0), STD_FLOOR),
        proprio_mean=proprio.mean(axis=0),
        proprio_std=np.maximum(proprio.std(axis=0), STD_FLOOR),
    )

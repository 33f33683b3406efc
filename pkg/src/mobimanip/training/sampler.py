"""Mixture sampling for co-training on mobile and static corpora.

Every batch slot independently picks the static corpus with probability
rho_static (when a static corpus is present), then an episode uniformly at
random within the chosen corpus and a start step uniformly within the
episode.  Static episodes contribute zero-padded base actions and only the
three camera views shared with the mobile platform; their extra fixed view
is ignored.  All normalization uses mobile-corpus statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import TrainConfig
from ..data.chunks import action_chunk
from ..data.corpus import Corpus
from ..data.stats import NormStats

VIEWS = ("top", "lwrist", "rwrist")


@dataclass
class Batch:
    rasters: dict[str, np.ndarray]  # view -> (B, h, w) float64 in [0, 1]
    proprio: np.ndarray  # (B, 14) normalized per config
    actions: np.ndarray  # (B, L, 16) normalized targets
    mask: np.ndarray  # (B, L) True on repeated tail rows
    origins: list[str]

    def __len__(self) -> int:
        return len(self.origins)


class MixtureSampler:
    def __init__(
        self,
        mobile: Corpus,
        static: Corpus | None,
        stats: NormStats,
        cfg: TrainConfig,
        seed: int | None = None,
    ):
        if len(mobile) == 0:
            raise ValueError("mobile corpus is empty")
        for ep in mobile:
            if ep.origin != "mobile":
                raise ValueError(f"mobile corpus contains {ep.origin} episode {ep.path}")
        if static is not None:
            for ep in static:
                if ep.origin != "static":
                    raise ValueError(f"static corpus contains {ep.origin} episode {ep.path}")
        self.mobile = mobile
        self.static = static if static is not None and len(static) > 0 else None
        self.stats = stats
        self.cfg = cfg
        self.rho = cfg.rho_static if self.static is not None else 0.0
        self.rng = np.random.default_rng(cfg.seed if seed is None else seed)

    def draw_indices(self, batch_size: int) -> list[tuple[str, int, int]]:
        """(origin, episode index, start step) per slot."""
        out = []
        for _ in range(batch_size):
            if self.rng.random() < self.rho:
                origin, corpus = "static", self.static
            else:
                origin, corpus = "mobile", self.mobile
            e = int(self.rng.integers(len(corpus)))
            t = int(self.rng.integers(corpus[e].n_steps))
            out.append((origin, e, t))
        return out

    def assemble(self, index: list[tuple[str, int, int]]) -> Batch:
        b = len(index)
        L = self.cfg.chunk_len
        rasters = {}
        proprio = np.empty((b, 14))
        actions = np.empty((b, L, 16))
        mask = np.zeros((b, L), dtype=bool)
        frames = {v: [] for v in VIEWS}
        origins = []
        for i, (origin, e, t) in enumerate(index):
            corpus = self.static if origin == "static" else self.mobile
            ep = corpus[e]
            for v in VIEWS:
                frames[v].append(np.asarray(ep.rasters[v][t], dtype=np.float64) / 255.0)
            proprio[i] = ep.proprio[t]
            chunk, m = action_chunk(ep, t, L)
            actions[i] = self.stats.normalize_action(chunk)
            mask[i] = m
            origins.append(origin)
        for v in VIEWS:
            rasters[v] = np.stack(frames[v])
        if self.cfg.normalize_proprio:
            proprio = self.stats.normalize_proprio(proprio)
        return Batch(rasters=rasters, proprio=proprio, actions=actions, mask=mask, origins=origins)

    def sample(self, batch_size: int | None = None) -> Batch:
        return self.assemble(self.draw_indices(batch_size or self.cfg.batch_size))

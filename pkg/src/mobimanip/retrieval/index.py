"""Retrieval policy: exact nearest-neighbor lookup over demonstration frames.

A key concatenates the encoded camera views (each weighted by camera_weight)
with the normalized proprioception scaled by state_weight.  Queries run
exact brute-force k-NN; ties in distance break deterministically by episode
index then step.  The returned action chunk is the weighted average of the
neighbors' stored chunks, with softmax(-d/T) weights where T is the mean
neighbor distance, or a plain mean when configured.
"""

from __future__ import annotations

import json
import os

import numpy as np

from ..config import RetrievalConfig
from ..data.chunks import action_chunk
from ..data.corpus import Corpus
from ..data.stats import NormStats
from .encoder import PatchEncoder, RandomProjectionEncoder

VIEWS = ("top", "lwrist", "rwrist")


def _key_matrix(encoder, corpus: Corpus, stats: NormStats, cfg: RetrievalConfig):
    blocks = []
    for v in VIEWS:
        feats = [encoder.encode(np.asarray(ep.rasters[v])) for ep in corpus]
        blocks.append(cfg.camera_weight * np.concatenate(feats, axis=0))
    prop = np.concatenate([stats.normalize_proprio(np.asarray(ep.proprio, dtype=np.float64)) for ep in corpus])
    blocks.append(cfg.state_weight * prop)
    keys = np.concatenate(blocks, axis=1)
    refs = np.array(
        [(e, t) for e, ep in enumerate(corpus) for t in range(ep.n_steps)], dtype=np.int32
    )
    return keys.astype(np.float64), refs


class VINNIndex:
    def __init__(self, keys: np.ndarray, refs: np.ndarray, corpus: Corpus, encoder, stats: NormStats, cfg: RetrievalConfig):
        self.keys = keys
        self.refs = refs
        self.corpus = corpus
        self.encoder = encoder
        self.stats = stats
        self.cfg = cfg

    @classmethod
    def build(cls, corpus: Corpus, encoder, stats: NormStats, cfg: RetrievalConfig | None = None) -> "VINNIndex":
        cfg = cfg or RetrievalConfig()
        keys, refs = _key_matrix(encoder, corpus, stats, cfg)
        return cls(keys, refs, corpus, encoder, stats, cfg)

    def encode_query(self, obs) -> np.ndarray:
        parts = [
            self.cfg.camera_weight * self.encoder.encode(np.asarray(obs.rasters[v])[None])[0]
            for v in VIEWS
        ]
        prop = self.stats.normalize_proprio(np.asarray(obs.proprio, dtype=np.float64)[None])[0]
        parts.append(self.cfg.state_weight * prop)
        return np.concatenate(parts)

    def query_key(self, q: np.ndarray, k: int):
        """Exact k-NN; returns (distances (k,), refs (k, 2)) tie-broken by
        (distance, episode, step)."""
        d2 = np.sum((self.keys - q) ** 2, axis=1)
        d = np.sqrt(np.maximum(d2, 0.0))
        order = np.lexsort((self.refs[:, 1], self.refs[:, 0], d))
        top = order[:k]
        return d[top], self.refs[top]

    def retrieve_chunk(self, obs, k: int | None = None) -> np.ndarray:
        """(chunk_len, 16) action chunk aggregated from the k nearest frames."""
        k = k or self.cfg.k
        d, refs = self.query_key(self.encode_query(obs), k)
        chunks = np.stack(
            [action_chunk(self.corpus[int(e)], int(t), self.cfg.chunk_len)[0] for e, t in refs]
        )
        w = self.weights(d)
        return np.tensordot(w, chunks, axes=1)

    def weights(self, d: np.ndarray) -> np.ndarray:
        if not self.cfg.softmax_weights:
            return np.full(len(d), 1.0 / len(d))
        temp = float(np.mean(d))
        if temp < 1e-9:
            return np.full(len(d), 1.0 / len(d))
        logits = -d / temp
        logits -= logits.max()
        e = np.exp(logits)
        return e / e.sum()

    def save(self, path: str) -> None:
        """Key matrix, refs, config and stats; episode paths for reattachment."""
        paths = []
        for ep in self.corpus:
            if ep.path is None:
                raise ValueError("corpus episodes must be file-backed to save an index")
            paths.append(os.path.relpath(os.path.abspath(ep.path), os.path.dirname(os.path.abspath(path))))
        enc_kind = type(self.encoder).__name__
        enc_params = getattr(self.encoder, "params", None)
        np.savez(
            path,
            keys=self.keys.astype(np.float32),
            refs=self.refs,
            meta=json.dumps(
                {
                    "episodes": paths,
                    "cfg": self.cfg.__dict__,
                    "stats": json.loads(self.stats.to_json()),
                    "encoder": enc_kind,
                    "encoder_pool_grid": self.encoder.pool_grid,
                    "encoder_dim": self.encoder.dim,
                }
            ),
            **({f"enc_{k}": v for k, v in enc_params.items()} if enc_params else {}),
        )

    @classmethod
    def load(cls, path: str) -> "VINNIndex":
        from ..data.episode import load_episode

        z = np.load(path, allow_pickle=False)
        meta = json.loads(str(z["meta"]))
        base = os.path.dirname(os.path.abspath(path))
        corpus = Corpus([load_episode(os.path.join(base, p)) for p in meta["episodes"]])
        cfg = RetrievalConfig(**meta["cfg"])
        stats = NormStats.from_json(json.dumps(meta["stats"]))
        if meta["encoder"] == "PatchEncoder":
            enc = PatchEncoder(meta["encoder_pool_grid"], meta["encoder_dim"])
            enc.params = {k[4:]: z[k].copy() for k in z.files if k.startswith("enc_")}
        else:
            enc = RandomProjectionEncoder(meta["encoder_pool_grid"], meta["encoder_dim"])
        return cls(z["keys"].astype(np.float64), z["refs"].copy(), corpus, enc, stats, cfg)


class VINNPolicy:
    """Policy-protocol wrapper so the executor can drive retrieval."""

    def __init__(self, index: VINNIndex, k: int | None = None):
        self.index = index
        self.k = k or index.cfg.k
        self.chunk_len = index.cfg.chunk_len

    def predict(self, obs) -> np.ndarray:
        return self.index.retrieve_chunk(obs, self.k)


def select_k(index: VINNIndex, val: Corpus, ks=(1, 3, 5, 10, 20), stride: int = 7) -> tuple[int, dict]:
    """Pick k by mean L1 between retrieved and demonstrated chunks."""

    class _Obs:
        __slots__ = ("rasters", "proprio")

        def __init__(self, rasters, proprio):
            self.rasters = rasters
            self.proprio = proprio

    losses = {k: [] for k in ks}
    for ep in val:
        for t in range(0, ep.n_steps, stride):
            obs = _Obs({v: ep.rasters[v][t] for v in VIEWS}, ep.proprio[t])
            truth, _ = action_chunk(ep, t, index.cfg.chunk_len)
            q = index.encode_query(obs)
            d, refs = index.query_key(q, max(ks))
            for k in ks:
                w = index.weights(d[:k])
                chunks = np.stack(
                    [
                        action_chunk(index.corpus[int(e)], int(s), index.cfg.chunk_len)[0]
                        for e, s in refs[:k]
                    ]
                )
                pred = np.tensordot(w, chunks, axes=1)
                losses[k].append(float(np.mean(np.abs(pred - truth))))
    means = {k: float(np.mean(v)) for k, v in losses.items()}
    best = min(means, key=lambda k: (means[k], k))
    return best, means

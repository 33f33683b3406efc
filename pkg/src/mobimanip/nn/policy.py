"""Chunked behavior-cloning policy network.

Per camera view: average-pooled patches -> two tanh layers down to an
embedding.  Proprioception gets its own embedding layer.  The concatenated
embeddings feed a two-layer tanh trunk and a linear head that emits the
whole normalized action chunk (chunk_len x 16) at once.

The L1 training loss runs over normalized actions.  Repeated tail rows
(episode-boundary padding) are included by default and can be masked out
via TrainConfig.mask_repeated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import ACTION_DIM, ARM_DIM, GRIP_DIMS, TrainConfig
from ..data.stats import NormStats
from ..training.sampler import VIEWS, Batch
from .layers import dense_bwd, dense_fwd, pool_raster, tanh_bwd, tanh_fwd


@dataclass
class FeatureStats:
    """Per-view mean/std of pooled raster features, for input whitening."""

    mean: dict[str, np.ndarray]
    std: dict[str, np.ndarray]

    def to_json(self) -> dict:
        return {
            v: {"mean": self.mean[v].tolist(), "std": self.std[v].tolist()}
            for v in self.mean
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FeatureStats":
        mean = {v: np.asarray(d["mean"], dtype=np.float64) for v, d in obj.items()}
        std = {v: np.asarray(d["std"], dtype=np.float64) for v, d in obj.items()}
        return cls(mean=mean, std=std)


def fit_feature_stats(episodes, cfg: TrainConfig, views=VIEWS,
                      episode_stride: int = 5, frame_stride: int = 20) -> FeatureStats:
    """Deterministic strided pass over the corpus; std floored at 1e-3."""
    acc = {v: [] for v in views}
    for ep in episodes[::episode_stride]:
        for t in range(0, ep.n_steps, frame_stride):
            for v in views:
                x = ep.rasters[v][t][None].astype(np.float64) / 255.0
                acc[v].append(pool_raster(x, cfg.pool_grid)[0])
    mean, std = {}, {}
    for v in views:
        f = np.asarray(acc[v])
        mean[v] = f.mean(axis=0)
        std[v] = f.std(axis=0) + 1e-3
    return FeatureStats(mean=mean, std=std)


def init_params(cfg: TrainConfig, views=VIEWS, seed: int | None = None) -> dict[str, np.ndarray]:
    """Uniform fan-in init, seed-controlled; f32 master copies."""
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    p = cfg.pool_grid * cfg.pool_grid
    h, e = cfg.hidden, cfg.embed
    out_dim = cfg.chunk_len * ACTION_DIM

    def mat(n_in, n_out):
        # variance-preserving uniform bound: Var(U(-b, b)) = b^2/3 = 1/n_in
        bound = np.sqrt(3.0 / n_in)
        return rng.uniform(-bound, bound, (n_in, n_out)).astype(np.float32)

    params: dict[str, np.ndarray] = {}
    for v in views:
        params[f"{v}_w1"] = mat(p, h)
        params[f"{v}_b1"] = np.zeros(h, dtype=np.float32)
        params[f"{v}_w2"] = mat(h, e)
        params[f"{v}_b2"] = np.zeros(e, dtype=np.float32)
    params["prop_w"] = mat(ARM_DIM, e)
    params["prop_b"] = np.zeros(e, dtype=np.float32)
    z = e * (len(views) + 1)
    t = cfg.trunk
    params["trunk_w1"] = mat(z, t)
    params["trunk_b1"] = np.zeros(t, dtype=np.float32)
    params["trunk_w2"] = mat(t, t)
    params["trunk_b2"] = np.zeros(t, dtype=np.float32)
    params["head_w"] = mat(t, out_dim)
    params["head_b"] = np.zeros(out_dim, dtype=np.float32)
    return params


def forward(params: dict, rasters: dict[str, np.ndarray], proprio: np.ndarray, cfg: TrainConfig,
            views=VIEWS, feat: FeatureStats | None = None):
    """Returns ((B, chunk_len, 16) prediction, cache for backward)."""
    p64 = {k: np.asarray(v, dtype=np.float64) for k, v in params.items()}
    cache: dict = {"p64": p64, "views": views}
    feats = []
    for v in views:
        x = pool_raster(np.asarray(rasters[v], dtype=np.float64), cfg.pool_grid)
        if feat is not None:
            x = (x - feat.mean[v]) / feat.std[v]
        a1, c1 = dense_fwd(x, p64[f"{v}_w1"], p64[f"{v}_b1"])
        h1, t1 = tanh_fwd(a1)
        a2, c2 = dense_fwd(h1, p64[f"{v}_w2"], p64[f"{v}_b2"])
        f, t2 = tanh_fwd(a2)
        cache[v] = (c1, t1, c2, t2)
        feats.append(f)
    ap, cp = dense_fwd(np.asarray(proprio, dtype=np.float64), p64["prop_w"], p64["prop_b"])
    fp, tp = tanh_fwd(ap)
    cache["prop"] = (cp, tp)
    z = np.concatenate(feats + [fp], axis=1)
    at1, ct1 = dense_fwd(z, p64["trunk_w1"], p64["trunk_b1"])
    h1, tt1 = tanh_fwd(at1)
    at2, ct2 = dense_fwd(h1, p64["trunk_w2"], p64["trunk_b2"])
    h2, tt2 = tanh_fwd(at2)
    y, ch = dense_fwd(h2, p64["head_w"], p64["head_b"])
    cache["trunk"] = (ct1, tt1, ct2, tt2, ch)
    b = y.shape[0]
    return y.reshape(b, cfg.chunk_len, ACTION_DIM), cache


def backward(cache: dict, dy: np.ndarray) -> dict[str, np.ndarray]:
    views = cache["views"]
    grads: dict[str, np.ndarray] = {}
    b = dy.shape[0]
    dy = dy.reshape(b, -1)
    ct1, tt1, ct2, tt2, ch = cache["trunk"]
    dh2, grads["head_w"], grads["head_b"] = dense_bwd(dy, ch)
    da2 = tanh_bwd(dh2, tt2)
    dh1, grads["trunk_w2"], grads["trunk_b2"] = dense_bwd(da2, ct2)
    da1 = tanh_bwd(dh1, tt1)
    dz, grads["trunk_w1"], grads["trunk_b1"] = dense_bwd(da1, ct1)
    embed = dz.shape[1] // (len(views) + 1)
    for i, v in enumerate(views):
        c1, t1, c2, t2 = cache[v]
        df = dz[:, i * embed : (i + 1) * embed]
        da2 = tanh_bwd(df, t2)
        dh1, grads[f"{v}_w2"], grads[f"{v}_b2"] = dense_bwd(da2, c2)
        da1 = tanh_bwd(dh1, t1)
        _, grads[f"{v}_w1"], grads[f"{v}_b1"] = dense_bwd(da1, c1)
    cp, tp = cache["prop"]
    dfp = dz[:, len(views) * embed :]
    dap = tanh_bwd(dfp, tp)
    _, grads["prop_w"], grads["prop_b"] = dense_bwd(dap, cp)
    return grads


def chunk_loss(pred: np.ndarray, target: np.ndarray, mask: np.ndarray, cfg: TrainConfig):
    """Masked mean absolute error plus its gradient w.r.t. pred.

    `cfg.gripper_weight` scales the two gripper columns; grasp commitment is
    carried by 2 of 16 action dims and an even loss underweights it.
    """
    if cfg.mask_repeated:
        w = (~mask).astype(np.float64)
    else:
        w = np.ones(mask.shape, dtype=np.float64)
    dim_w = np.ones(pred.shape[2])
    dim_w[list(GRIP_DIMS)] = cfg.gripper_weight
    wexp = w[:, :, None] * dim_w
    total = float(wexp.sum())
    if total == 0:
        return 0.0, np.zeros_like(pred)
    diff = pred - target
    loss = float(np.sum(np.abs(diff) * wexp) / total)
    dpred = np.sign(diff) * wexp / total
    return loss, dpred


class NonFiniteLossError(RuntimeError):
    def __init__(self, sample_index: int, loss: float):
        self.sample_index = sample_index
        self.loss = loss
        super().__init__(f"non-finite loss {loss!r} from batch sample {sample_index}")


def loss_and_grads(params: dict, batch: Batch, cfg: TrainConfig, views=VIEWS,
                   feat: FeatureStats | None = None):
    pred, cache = forward(params, batch.rasters, batch.proprio, cfg, views, feat)
    loss, dpred = chunk_loss(pred, batch.actions, batch.mask, cfg)
    if not np.isfinite(loss):
        per = np.abs(pred - batch.actions).reshape(pred.shape[0], -1).sum(axis=1)
        bad = np.flatnonzero(~np.isfinite(per))
        idx = int(bad[0]) if bad.size else 0
        raise NonFiniteLossError(idx, loss)
    grads = backward(cache, dpred)
    return loss, grads


class BCPolicy:
    """Inference wrapper: observation in, denormalized action chunk out."""

    def __init__(self, params: dict, stats: NormStats, cfg: TrainConfig, views=VIEWS,
                 feat: FeatureStats | None = None):
        self.params = params
        self.stats = stats
        self.cfg = cfg
        self.views = views
        self.feat = feat
        self.chunk_len = cfg.chunk_len

    def predict(self, obs) -> np.ndarray:
        rasters = {
            v: np.asarray(obs.rasters[v], dtype=np.float64)[None] / 255.0 for v in self.views
        }
        proprio = np.asarray(obs.proprio, dtype=np.float64)[None]
        if self.cfg.normalize_proprio:
            proprio = self.stats.normalize_proprio(proprio)
        pred, _ = forward(self.params, rasters, proprio, self.cfg, self.views, self.feat)
        return self.stats.denormalize_action(pred[0])

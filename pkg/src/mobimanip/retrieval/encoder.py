"""Frame encoders for retrieval keys.

Two implementations behind one interface (`encode` mapping a stack of
rasters to unit-norm embeddings):

* RandomProjectionEncoder: fixed orthogonal projection of pooled patches.
  No training; serves as the comparison baseline.
* PatchEncoder: a small tanh network trained with augmentation consistency:
  two random crops/brightness-jitters of the same frame must embed close
  under an EMA target network, with a predictor head on the online side and
  a batch-variance hinge that prevents the trivial constant solution.
"""

from __future__ import annotations

import numpy as np

from ..config import RetrievalConfig
from ..nn.layers import dense_bwd, dense_fwd, pool_raster, tanh_bwd, tanh_fwd
from ..nn.optim import AdamW

HIDDEN = 128
VAR_TARGET = 0.1
VAR_WEIGHT = 10.0


def _l2_rows(x: np.ndarray) -> np.ndarray:
    return x / np.maximum(np.linalg.norm(x, axis=1, keepdims=True), 1e-12)


class RandomProjectionEncoder:
    def __init__(self, pool_grid: int = 8, dim: int = 64, seed: int = 0):
        self.pool_grid = pool_grid
        self.dim = dim
        rng = np.random.default_rng(seed)
        p = pool_grid * pool_grid
        a = rng.normal(0.0, 1.0, (p, max(p, dim)))
        q, _ = np.linalg.qr(a)
        self.proj = q[:, :dim]

    def encode(self, rasters: np.ndarray) -> np.ndarray:
        x = pool_raster(np.asarray(rasters, dtype=np.float64) / 255.0, self.pool_grid)
        return _l2_rows(x @ self.proj)


class PatchEncoder:
    def __init__(self, pool_grid: int = 8, dim: int = 64, seed: int = 0):
        self.pool_grid = pool_grid
        self.dim = dim
        rng = np.random.default_rng(seed)
        p = pool_grid * pool_grid

        def mat(n_in, n_out):
            return rng.normal(0.0, np.sqrt(1.0 / n_in), (n_in, n_out)).astype(np.float32)

        self.params = {
            "w1": mat(p, HIDDEN),
            "b1": np.zeros(HIDDEN, dtype=np.float32),
            "w2": mat(HIDDEN, dim),
            "b2": np.zeros(dim, dtype=np.float32),
        }

    def _mlp_fwd(self, params: dict, x: np.ndarray):
        a1, c1 = dense_fwd(x, params["w1"].astype(np.float64), params["b1"].astype(np.float64))
        h, t1 = tanh_fwd(a1)
        y, c2 = dense_fwd(h, params["w2"].astype(np.float64), params["b2"].astype(np.float64))
        return y, (c1, t1, c2)

    def _mlp_bwd(self, cache, dy):
        c1, t1, c2 = cache
        dh, dw2, db2 = dense_bwd(dy, c2)
        da = tanh_bwd(dh, t1)
        _, dw1, db1 = dense_bwd(da, c1)
        return {"w1": dw1, "b1": db1, "w2": dw2, "b2": db2}

    def embed_pooled(self, x: np.ndarray) -> np.ndarray:
        y, _ = self._mlp_fwd(self.params, x)
        return y

    def encode(self, rasters: np.ndarray) -> np.ndarray:
        x = pool_raster(np.asarray(rasters, dtype=np.float64) / 255.0, self.pool_grid)
        return _l2_rows(self.embed_pooled(x))


def augment(frames: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Random 2-pixel crop shift (zero fill) and brightness scale per frame."""
    n, h, w = frames.shape
    out = np.zeros((n, h, w), dtype=np.float64)
    shifts = rng.integers(-2, 3, size=(n, 2))
    scales = rng.uniform(0.8, 1.2, size=n)
    for i in range(n):
        dy, dx = int(shifts[i, 0]), int(shifts[i, 1])
        src = frames[i]
        ys = slice(max(0, dy), min(h, h + dy))
        xs = slice(max(0, dx), min(w, w + dx))
        yd = slice(max(0, -dy), max(0, -dy) + (ys.stop - ys.start))
        xd = slice(max(0, -dx), max(0, -dx) + (xs.stop - xs.start))
        out[i, yd, xd] = src[ys, xs]
        out[i] = np.clip(out[i] * scales[i], 0, 255)
    return out


def collect_frames(corpus, views=("top", "lwrist", "rwrist"), stride: int = 5) -> np.ndarray:
    """Subsampled frames from every episode and view, resized by pooling later.

    Views may have different native sizes; frames are pooled inside the
    encoders, so this returns a list per size bucket concatenated after
    pooling would lose the raw pixels augmentation needs.  All standard
    views pool to the same grid, so we just upsize smaller rasters by
    nearest-neighbor repetition to the largest found.
    """
    groups = []
    max_side = 0
    for ep in corpus:
        for v in views:
            r = np.asarray(ep.rasters[v][::stride])
            max_side = max(max_side, r.shape[1])
            groups.append(r)
    out = []
    for r in groups:
        if r.shape[1] != max_side:
            rep = max_side // r.shape[1]
            r = np.repeat(np.repeat(r, rep, axis=1), rep, axis=2)
        out.append(r)
    return np.concatenate(out, axis=0)


def train_encoder(
    frames: np.ndarray,
    cfg: RetrievalConfig | None = None,
    seed: int = 0,
    epochs: int | None = None,
    log_every: int = 0,
) -> tuple[PatchEncoder, list[float]]:
    """Augmentation-consistency training; returns the encoder and loss curve."""
    cfg = cfg or RetrievalConfig()
    rng = np.random.default_rng(seed)
    enc = PatchEncoder(pool_grid=8, dim=cfg.feature_dim, seed=seed)
    target = {k: v.copy() for k, v in enc.params.items()}
    pred_rng = np.random.default_rng(seed + 1)
    predictor = {
        "wq": pred_rng.normal(0, np.sqrt(1.0 / cfg.feature_dim), (cfg.feature_dim, cfg.feature_dim)).astype(np.float32),
        "bq": np.zeros(cfg.feature_dim, dtype=np.float32),
    }
    opt = AdamW(enc.params, cfg.enc_lr, weight_decay=cfg.enc_weight_decay)
    opt_p = AdamW(predictor, cfg.enc_lr, weight_decay=cfg.enc_weight_decay)
    n = len(frames)
    batch = min(cfg.enc_batch, n)
    losses = []
    n_epochs = cfg.enc_epochs if epochs is None else epochs
    for epoch in range(n_epochs):
        order = rng.permutation(n)
        for s in range(0, n - batch + 1, batch):
            idx = order[s : s + batch]
            raw = np.asarray(frames[idx], dtype=np.float64)
            xa = pool_raster(augment(raw, rng) / 255.0, enc.pool_grid)
            xb = pool_raster(augment(raw, rng) / 255.0, enc.pool_grid)

            ya, cache_a = enc._mlp_fwd(enc.params, xa)
            with_t, _ = enc._mlp_fwd(target, xb)
            q, cache_q = dense_fwd(ya, predictor["wq"].astype(np.float64), predictor["bq"].astype(np.float64))

            qn = _l2_rows(q)
            tn = _l2_rows(with_t)
            diff = qn - tn
            consist = float(np.mean(np.sum(diff * diff, axis=1)))

            # d/dq of ||q/|q| - t||^2 = 2 (I - qn qn^T) diff / |q|
            qnorm = np.maximum(np.linalg.norm(q, axis=1, keepdims=True), 1e-12)
            dqn = 2.0 * diff / batch
            dq = (dqn - qn * np.sum(qn * dqn, axis=1, keepdims=True)) / qnorm

            dya, dwq, dbq = dense_bwd(dq, cache_q)

            # variance hinge on the online embedding keeps it from collapsing
            std = ya.std(axis=0)
            gap = VAR_TARGET - std
            active = gap > 0
            var_loss = float(VAR_WEIGHT * np.mean(np.maximum(gap, 0.0)))
            if active.any():
                centered = ya - ya.mean(axis=0)
                dstd = np.zeros_like(std)
                dstd[active] = -VAR_WEIGHT / len(std)
                dya += dstd * centered / np.maximum(std, 1e-12) / batch

            grads = enc._mlp_bwd(cache_a, dya)
            opt.update(enc.params, grads)
            opt_p.update(predictor, {"wq": dwq, "bq": dbq})
            m = cfg.enc_momentum
            for k in target:
                target[k] = (m * target[k].astype(np.float64) + (1 - m) * enc.params[k]).astype(np.float32)
            losses.append(consist + var_loss)
        if log_every and (epoch + 1) % log_every == 0:
            import logging

            logging.getLogger(__name__).info("encoder epoch %d loss %.4f", epoch + 1, losses[-1])
    return enc, losses

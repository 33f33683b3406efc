"""Policy checkpoints: JSON meta plus a little-endian float32 parameter block.

Layout:
    bytes 0:4   magic b"MMCK"
    bytes 4:8   u32 header length
    then        UTF-8 JSON header: parameter names/shapes in block order,
                training config, normalization stats, optional f64 optimizer
                block descriptor
    then        concatenated '<f4' parameter data in header order
    then        optional concatenated '<f8' optimizer state

Loading restores bit-identical f32 masters, so a save/load round trip
changes no forward output.
"""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from ..config import TrainConfig
from ..data.stats import NormStats

MAGIC = b"MMCK"


class CheckpointError(Exception):
    pass


def save_checkpoint(path: str, params: dict, cfg: TrainConfig, stats: NormStats, views, opt_arrays: dict | None = None, extra: dict | None = None) -> None:
    names = sorted(params)
    header = {
        "format": "mobimanip-checkpoint",
        "version": 1,
        "params": [{"name": k, "shape": list(params[k].shape)} for k in names],
        "dtype": "<f4",
        "config": asdict(cfg),
        "views": list(views),
        "stats": json.loads(stats.to_json()),
        "extra": extra or {},
    }
    opt_names = sorted(opt_arrays) if opt_arrays else []
    if opt_arrays:
        header["opt"] = [{"name": k, "shape": list(opt_arrays[k].shape)} for k in opt_names]
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(np.uint32(len(blob)).tobytes())
        f.write(blob)
        for k in names:
            f.write(np.ascontiguousarray(params[k], dtype="<f4").tobytes())
        for k in opt_names:
            f.write(np.ascontiguousarray(opt_arrays[k], dtype="<f8").tobytes())


def load_checkpoint(path: str):
    """Returns (params, cfg, stats, views, opt_arrays or None, extra)."""
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint")
        hlen = int(np.frombuffer(f.read(4), dtype="<u4")[0])
        header = json.loads(f.read(hlen).decode("utf-8"))
        params = {}
        for spec in header["params"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(f.read(count * 4), dtype="<f4")
            if data.size != count:
                raise CheckpointError(f"{path}: parameter block truncated")
            params[spec["name"]] = data.reshape(shape).copy()
        opt_arrays = None
        if "opt" in header:
            opt_arrays = {}
            for spec in header["opt"]:
                shape = tuple(spec["shape"])
                count = int(np.prod(shape)) if shape else 1
                data = np.frombuffer(f.read(count * 8), dtype="<f8")
                if data.size != count:
                    raise CheckpointError(f"{path}: optimizer block truncated")
                opt_arrays[spec["name"]] = data.reshape(shape).copy()
    cfg = TrainConfig(**header["config"])
    stats = NormStats.from_json(json.dumps(header["stats"]))
    return params, cfg, stats, tuple(header["views"]), opt_arrays, header.get("extra", {})

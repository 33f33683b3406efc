"""MAEP episode files: one demonstration per file.

Layout, all little-endian:

    bytes 0:4    magic b"MAEP"
    bytes 4:6    format version, u16
    bytes 6:10   header length in bytes, u32
    then         UTF-8 JSON header
    then         n_steps fixed-stride records

Each record is: step index (u32), proprioception (14 f32), base pose
(3 f32: x, y, theta), arm action targets (14 f32), base action (base_dims
f32; 0 for static episodes), then one raw uint8 raster per camera in header
order.  Readers memory-map the record block so corpora far larger than RAM
stay cheap to open.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from ..config import ARM_DIM

MAGIC = b"MAEP"
VERSION = 1
_PREFIX_LEN = 10  # magic + version + header length


class MAEPError(Exception):
    """Malformed episode file."""


class BadMagicError(MAEPError):
    pass


class BadVersionError(MAEPError):
    pass


class TruncatedFileError(MAEPError):
    pass


def record_dtype(cameras: list[dict], base_dims: int) -> np.dtype:
    """Structured dtype of one record; explicit little-endian scalars."""
    fields = [
        ("idx", "<u4"),
        ("proprio", "<f4", (ARM_DIM,)),
        ("base_pose", "<f4", (3,)),
        ("action_arms", "<f4", (ARM_DIM,)),
        ("action_base", "<f4", (base_dims,)),
    ]
    for cam in cameras:
        fields.append((f"cam_{cam['name']}", "u1", (cam["h"], cam["w"])))
    return np.dtype(fields)


@dataclass
class Episode:
    header: dict
    proprio: np.ndarray  # (T, 14) f32
    base_pose: np.ndarray  # (T, 3) f32
    action_arms: np.ndarray  # (T, 14) f32
    action_base: np.ndarray  # (T, base_dims) f32
    rasters: dict[str, np.ndarray]  # name -> (T, h, w) u8
    path: str | None = None

    @property
    def n_steps(self) -> int:
        return int(self.header["n_steps"])

    @property
    def origin(self) -> str:
        return self.header["origin"]

    @property
    def base_dims(self) -> int:
        return int(self.header["base_dims"])

    def actions(self) -> np.ndarray:
        """(T, 16) float64 actions; static episodes are zero-padded."""
        out = np.zeros((self.n_steps, ARM_DIM + 2))
        out[:, :ARM_DIM] = self.action_arms
        if self.base_dims:
            out[:, ARM_DIM : ARM_DIM + self.base_dims] = self.action_base
        return out


def write_episode(path: str, episode: Episode) -> None:
    header = dict(episode.header)
    t = len(episode.action_arms)
    header["n_steps"] = t
    cameras = header["cameras"]
    dtype = record_dtype(cameras, int(header["base_dims"]))
    rec = np.zeros(t, dtype=dtype)
    rec["idx"] = np.arange(t, dtype=np.uint32)
    rec["proprio"] = episode.proprio
    rec["base_pose"] = episode.base_pose
    rec["action_arms"] = episode.action_arms
    if int(header["base_dims"]):
        rec["action_base"] = episode.action_base
    for cam in cameras:
        rec[f"cam_{cam['name']}"] = episode.rasters[cam["name"]]
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    tmp = path + ".tmp"
    with open(tmp, "wb") as f:
        f.write(MAGIC)
        f.write(np.uint16(VERSION).tobytes())
        f.write(np.uint32(len(blob)).tobytes())
        f.write(blob)
        f.write(rec.tobytes())
    os.replace(tmp, path)


def load_episode(path: str, mmap: bool = True) -> Episode:
    size = os.path.getsize(path)
    with open(path, "rb") as f:
        prefix = f.read(_PREFIX_LEN)
        if len(prefix) < _PREFIX_LEN or prefix[:4] != MAGIC:
            raise BadMagicError(f"{path}: not a MAEP file")
        version = int(np.frombuffer(prefix[4:6], dtype="<u2")[0])
        if version != VERSION:
            raise BadVersionError(f"{path}: unsupported version {version}")
        header_len = int(np.frombuffer(prefix[6:10], dtype="<u4")[0])
        blob = f.read(header_len)
        if len(blob) < header_len:
            raise TruncatedFileError(f"{path}: header cut short")
        try:
            header = json.loads(blob.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise MAEPError(f"{path}: bad header json: {e}") from None

    dtype = record_dtype(header["cameras"], int(header["base_dims"]))
    n = int(header["n_steps"])
    expect = _PREFIX_LEN + header_len + n * dtype.itemsize
    if size < expect:
        raise TruncatedFileError(f"{path}: {size} bytes, expected {expect}")
    if size > expect:
        raise MAEPError(f"{path}: {size - expect} trailing bytes")

    offset = _PREFIX_LEN + header_len
    if mmap:
        rec = np.memmap(path, dtype=dtype, mode="r", offset=offset, shape=(n,))
    else:
        with open(path, "rb") as f:
            f.seek(offset)
            rec = np.frombuffer(f.read(), dtype=dtype)
    rasters = {cam["name"]: rec[f"cam_{cam['name']}"] for cam in header["cameras"]}
    return Episode(
        header=header,
        proprio=rec["proprio"],
        base_pose=rec["base_pose"],
        action_arms=rec["action_arms"],
        action_base=rec["action_base"],
        rasters=rasters,
        path=path,
    )

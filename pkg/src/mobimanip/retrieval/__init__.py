from .encoder import PatchEncoder, RandomProjectionEncoder, train_encoder, collect_frames
from .index import VINNIndex, VINNPolicy, select_k

__all__ = [
    "PatchEncoder",
    "RandomProjectionEncoder",
    "VINNIndex",
    "VINNPolicy",
    "collect_frames",
    "select_k",
    "train_encoder",
]

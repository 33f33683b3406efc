from .episode import (
    BadMagicError,
    BadVersionError,
    Episode,
    MAEPError,
    TruncatedFileError,
    load_episode,
    record_dtype,
    write_episode,
)
from .corpus import Corpus
from .stats import NormStats, compute_norm_stats
from .collect import collect_demos, trace_to_episode

__all__ = [
    "BadMagicError",
    "BadVersionError",
    "Corpus",
    "Episode",
    "MAEPError",
    "NormStats",
    "TruncatedFileError",
    "collect_demos",
    "compute_norm_stats",
    "load_episode",
    "record_dtype",
    "trace_to_episode",
    "write_episode",
]

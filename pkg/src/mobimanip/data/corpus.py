"""Episode collections addressed by manifest files (one path per line)."""

from __future__ import annotations

import glob
import os

from .episode import Episode, load_episode


class Corpus:
    def __init__(self, episodes: list[Episode]):
        self.episodes = episodes

    @classmethod
    def from_manifest(cls, path: str, mmap: bool = True) -> "Corpus":
        base = os.path.dirname(os.path.abspath(path))
        eps = []
        with open(path) as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                p = line if os.path.isabs(line) else os.path.join(base, line)
                eps.append(load_episode(p, mmap=mmap))
        return cls(eps)

    @classmethod
    def from_dir(cls, directory: str, mmap: bool = True) -> "Corpus":
        paths = sorted(glob.glob(os.path.join(directory, "*.maep")))
        return cls([load_episode(p, mmap=mmap) for p in paths])

    def write_manifest(self, path: str) -> None:
        base = os.path.dirname(os.path.abspath(path))
        with open(path, "w") as f:
            for ep in self.episodes:
                if ep.path is None:
                    raise ValueError("episode has no backing file")
                f.write(os.path.relpath(os.path.abspath(ep.path), base) + "\n")

    def filter_origin(self, origin: str) -> "Corpus":
        return Corpus([e for e in self.episodes if e.origin == origin])

    def subset(self, n: int) -> "Corpus":
        return Corpus(self.episodes[:n])

    def n_steps(self) -> int:
        return sum(e.n_steps for e in self.episodes)

    def __len__(self) -> int:
        return len(self.episodes)

    def __getitem__(self, i: int) -> Episode:
        return self.episodes[i]

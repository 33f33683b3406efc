import numpy as np
import pytest

from mobimanip.data import Episode
from mobimanip.data.corpus import Corpus


def make_episode(origin="mobile", t=30, seed=0, size=8, task=None):
    """In-memory episode with the standard camera names at a tiny resolution.

    Rasters carry a faint action signature so small nets have something to
    latch onto; unit tests mostly ignore the pixels.
    """
    rng = np.random.default_rng(seed)
    names = ["top", "lwrist", "rwrist"] + (["front"] if origin == "static" else [])
    cams = [{"name": n, "h": size, "w": size} for n in names]
    base_dims = 2 if origin == "mobile" else 0
    arms = rng.normal(0.0, 0.8, (t, 14)).astype(np.float32)
    rasters = {}
    for n in names:
        img = rng.integers(0, 100, (t, size, size)).astype(np.float32)
        img[:, 0, 0] = np.clip(arms[:, 0] * 40 + 120, 0, 255)
        rasters[n] = img.astype(np.uint8)
    return Episode(
        header={
            "task": task or ("static_pick" if origin == "static" else "wipe"),
            "origin": origin,
            "n_steps": t,
            "dt": 0.02,
            "base_dims": base_dims,
            "cameras": cams,
        },
        proprio=rng.normal(0.0, 0.5, (t, 14)).astype(np.float32),
        base_pose=rng.normal(0.0, 1.0, (t, 3)).astype(np.float32),
        action_arms=arms,
        action_base=rng.normal(0.0, 0.4, (t, base_dims)).astype(np.float32),
        rasters=rasters,
    )


def make_corpus(origin="mobile", n=4, t=30, seed=0, size=8):
    return Corpus([make_episode(origin, t=t, seed=seed + i, size=size) for i in range(n)])


@pytest.fixture
def tiny_mobile():
    return make_corpus("mobile", n=4, t=30, seed=10)


@pytest.fixture
def tiny_static():
    return make_corpus("static", n=4, t=25, seed=50)

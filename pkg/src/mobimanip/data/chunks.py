"""Fixed-length action chunks cut from episodes.

A chunk starting at step t takes rows t .. t+L-1.  Rows past the end of the
episode repeat the final action and are flagged in the mask, so a chunk that
starts at the last step is the final action once followed by L-1 flagged
repeats.
"""

from __future__ import annotations

import numpy as np

from .episode import Episode


def action_chunk(ep: Episode, t: int, length: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ((length, 16) float64 actions, (length,) bool repeat mask)."""
    n = ep.n_steps
    if not 0 <= t < n:
        raise IndexError(f"chunk start {t} outside episode of {n} steps")
    actions = ep.actions()
    real = min(length, n - t)
    chunk = np.empty((length, actions.shape[1]))
    chunk[:real] = actions[t : t + real]
    chunk[real:] = actions[n - 1]
    mask = np.zeros(length, dtype=bool)
    mask[real:] = True
    return chunk, mask

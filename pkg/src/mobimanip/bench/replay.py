"""Open-loop replay of recorded base commands under actuation disturbance.

The probe trajectory is a half-circle turn (1 m radius by default) recorded
without disturbance, then replayed with the standard noise model.  Because
episodes store commanded velocities, a zero-noise replay reproduces the
reference exactly; under the default disturbance the terminal error shows
how far pure playback drifts, which is what closed-loop or delay-aware
execution has to beat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..config import SimConfig
from ..sim.geometry import Pose2D, wrap_angle
from ..sim.robot import Action, NoiseModel, fk_ee, neutral_state, step


def turn_commands(cfg: SimConfig, v: float = 0.6, w: float = 0.6, lead_in: float = 0.5) -> np.ndarray:
    """(T, 2) base commands: straight lead-in then a 180-degree left arc."""
    n_lead = int(round(lead_in / cfg.dt))
    n_arc = int(round(math.pi / w / cfg.dt))
    cmds = np.zeros((n_lead + n_arc, 2))
    cmds[:n_lead] = [v, 0.0]
    cmds[n_lead:] = [v, w]
    return cmds


def rollout_base(cmds: np.ndarray, cfg: SimConfig, noise: NoiseModel):
    state = neutral_state(cfg)
    poses = [state.base.copy()]
    for c in cmds:
        state = step(state, Action(state.proprio(), np.asarray(c, dtype=float)), cfg, noise)
        poses.append(state.base.copy())
    ee = fk_ee(state.base, state.left.joints, cfg, "left")
    return poses, ee


@dataclass
class ReplayDriftResult:
    reference_end: tuple[float, float, float]
    zero_noise_error: float
    errors: list[float] = field(default_factory=list)
    forward_offsets: list[float] = field(default_factory=list)
    left_offsets: list[float] = field(default_factory=list)

    @property
    def mean_error(self) -> float:
        return float(np.mean(self.errors))

    @property
    def mean_left_offset(self) -> float:
        return float(np.mean(self.left_offsets))

    def principal_axis(self) -> tuple[list[float], float]:
        """Dominant scatter direction (in the end-pose frame) and the standard
        deviation along it."""
        pts = np.stack([self.forward_offsets, self.left_offsets], axis=1)
        cov = np.cov(pts.T)
        w, v = np.linalg.eigh(cov)
        return [float(v[0, -1]), float(v[1, -1])], float(np.sqrt(max(w[-1], 0.0)))

    def summary(self) -> dict:
        axis, spread = self.principal_axis()
        return {
            "n_replays": len(self.errors),
            "mean_terminal_ee_error_m": self.mean_error,
            "zero_noise_error_m": self.zero_noise_error,
            "mean_forward_offset_m": float(np.mean(self.forward_offsets)),
            "mean_left_offset_m": self.mean_left_offset,
            "spread_m": float(np.std(self.errors)),
            "principal_axis": axis,
            "principal_spread_m": spread,
        }


def replay_drift(
    cfg: SimConfig | None = None,
    n_replays: int = 20,
    seed: int = 0,
    noise_factory=None,
    commands: np.ndarray | None = None,
) -> ReplayDriftResult:
    """Record the probe noise-free, then replay its commands under noise."""
    cfg = cfg or SimConfig()
    cmds = commands if commands is not None else turn_commands(cfg)
    ref_poses, ref_ee = rollout_base(cmds, cfg, NoiseModel.zero())
    end = ref_poses[-1]

    _, ee_again = rollout_base(cmds, cfg, NoiseModel.zero())
    zero_err = float(np.linalg.norm(ee_again - ref_ee))

    # displacement expressed in the reference end-pose frame
    fwd = np.array([math.cos(end.theta), math.sin(end.theta)])
    left = np.array([-math.sin(end.theta), math.cos(end.theta)])

    result = ReplayDriftResult(
        reference_end=(end.x, end.y, end.theta), zero_noise_error=zero_err
    )
    for i in range(n_replays):
        noise = (
            noise_factory(seed + i) if noise_factory else NoiseModel.sampled(cfg, seed + i)
        )
        _, ee = rollout_base(cmds, cfg, noise)
        delta = ee - ref_ee
        result.errors.append(float(np.linalg.norm(delta)))
        result.forward_offsets.append(float(delta @ fwd))
        result.left_offsets.append(float(delta @ left))
    return result

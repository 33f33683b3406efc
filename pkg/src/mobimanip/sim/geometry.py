"""Planar poses and angle arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Normalize an angle into (-pi, pi]."""
    t = math.fmod(theta + math.pi, TWO_PI)
    if t <= 0.0:
        t += TWO_PI
    return t - math.pi


@dataclass
class Pose2D:
    """SE(2) pose: position plus heading."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def rot(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, -s], [s, c]])

    def to_world(self, local: np.ndarray) -> np.ndarray:
        """Map point(s) in this frame to world coordinates."""
        local = np.asarray(local, dtype=float)
        return local @ self.rot().T + self.xy

    def to_local(self, world: np.ndarray) -> np.ndarray:
        """Map world point(s) into this frame."""
        world = np.asarray(world, dtype=float)
        return (world - self.xy) @ self.rot()

    def copy(self) -> "Pose2D":
        return Pose2D(self.x, self.y, self.theta)


def integrate_unicycle(pose: Pose2D, v: float, w: float, dt: float) -> Pose2D:
    """Advance a differential-drive pose by one step of constant (v, w).

    Uses the exact arc solution; below |w| = 1e-6 rad/s the motion is treated
    as a straight line to avoid catastrophic cancellation in (sin(wt)/w).
    """
    if abs(w) > 1e-6:
        # circular arc of radius v / w around the instantaneous center
        th1 = pose.theta + w * dt
        r = v / w
        x = pose.x + r * (math.sin(th1) - math.sin(pose.theta))
        y = pose.y - r * (math.cos(th1) - math.cos(pose.theta))
        return Pose2D(x, y, wrap_angle(th1))
    x = pose.x + v * dt * math.cos(pose.theta)
    y = pose.y + v * dt * math.sin(pose.theta)
    return Pose2D(x, y, wrap_angle(pose.theta + w * dt))

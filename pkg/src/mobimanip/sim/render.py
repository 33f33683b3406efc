"""Grayscale raster rendering of the planar scene.

Each view is a square window into the world, either tracking a robot frame
(base or an end effector) or fixed in the world.  Background is 0, robot
geometry is 255, objects use their configured gray value.  Rendering is a
pure function of (world, robot, camera): identical inputs give identical
bytes.
"""

from __future__ import annotations

import math

import cv2
import numpy as np

from ..config import CameraConfig, SimConfig
from .geometry import Pose2D
from .robot import RobotState, ee_angle, fk_points

ROBOT_COLOR = 255


def _camera_frame(cam: CameraConfig, robot: RobotState, cfg: SimConfig) -> tuple[np.ndarray, float]:
    if cam.frame == "base":
        return robot.base.xy, robot.base.theta
    if cam.frame == "ee_left":
        pts = fk_points(robot.base, robot.left.joints, cfg, "left")
        return pts[-1], ee_angle(robot.base, robot.left.joints, cfg)
    if cam.frame == "ee_right":
        pts = fk_points(robot.base, robot.right.joints, cfg, "right")
        return pts[-1], ee_angle(robot.base, robot.right.joints, cfg)
    if cam.frame == "world":
        return np.array(cam.center, dtype=float), 0.0
    raise ValueError(f"unknown camera frame {cam.frame!r}")


class _Window:
    def __init__(self, center: np.ndarray, angle: float, window_m: float, px: int):
        c, s = math.cos(-angle), math.sin(-angle)
        self.rot = np.array([[c, -s], [s, c]])
        self.center = center
        self.scale = px / window_m
        self.half = px / 2.0

    def to_px(self, world_xy: np.ndarray) -> tuple[int, int]:
        rel = self.rot @ (np.asarray(world_xy, dtype=float) - self.center)
        u = int(round(self.half + rel[0] * self.scale))
        v = int(round(self.half - rel[1] * self.scale))
        return u, v

    def to_r(self, radius_m: float) -> int:
        return max(1, int(round(radius_m * self.scale)))


def render_view(world, robot: RobotState, cfg: SimConfig, cam: CameraConfig) -> np.ndarray:
    center, angle = _camera_frame(cam, robot, cfg)
    win = _Window(center, angle, cam.window_m, cam.size_px)
    img = np.zeros((cam.size_px, cam.size_px), dtype=np.uint8)

    # zones first so solid objects draw over them
    for obj in world.objects.values():
        if obj.zone:
            cv2.circle(img, win.to_px(obj.pos), win.to_r(obj.radius), obj.color, -1)
    for obj in world.objects.values():
        if not obj.zone:
            cv2.circle(img, win.to_px(obj.pos), win.to_r(obj.radius), obj.color, -1)

    cv2.circle(img, win.to_px(robot.base.xy), win.to_r(cfg.base_radius), ROBOT_COLOR, 1)
    nose = robot.base.to_world(np.array([cfg.base_radius, 0.0]))
    cv2.line(img, win.to_px(robot.base.xy), win.to_px(nose), ROBOT_COLOR, 1)
    for side in ("left", "right"):
        pts = fk_points(robot.base, robot.arm(side).joints, cfg, side)
        for a, b in zip(pts[:-1], pts[1:]):
            cv2.line(img, win.to_px(a), win.to_px(b), ROBOT_COLOR, 1)
        # gripper marker: filled when closed, hollow when open
        thickness = -1 if robot.arm(side).gripper < cfg.gripper_close_threshold else 1
        cv2.circle(img, win.to_px(pts[-1]), win.to_r(cfg.ee_radius), ROBOT_COLOR, thickness)
    return img

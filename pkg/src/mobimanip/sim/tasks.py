"""Task definitions: scene randomization, status rules, expert programs.

Three families:

* ``wipe``        mobile bimanual sequence: grasp a towel, lift a glass with
                  the other arm, wipe the spill under it, put the glass back.
* ``push``        mobile base-only: shove N pucks past a goal line.  The
                  3-puck variant is for data collection; 4 and 5 puck
                  variants probe generalization.
* ``static_pick`` stationary pick-and-place used as the co-training corpus;
                  the base is locked and an extra fixed camera is present.
                  Half the scenes add a second item the free arm must hold
                  aloft while the pick runs, so the corpus demonstrates the
                  same hold-while-working coordination the wipe task needs.

Sub-task predicates are pure functions of a world snapshot.  Later sub-tasks
only count as attempted when the previous one has succeeded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..config import CameraConfig, SimConfig, default_cameras
from .geometry import Pose2D, wrap_angle
from .world import WorldObject, WorldState
from .robot import RobotState, neutral_state
from .expert import Waypoint

GRAY = {"spill": 60, "glass": 90, "coaster": 120, "towel": 150, "puck": 180, "post": 210}


@dataclass(frozen=True)
class TaskSpec:
    name: str
    static: bool
    horizon: int
    build: Callable[[np.random.Generator, SimConfig], WorldState]
    sub_tasks: tuple
    expert_program: Callable[[WorldState, SimConfig], list]
    update_status: Callable | None = None
    cameras: tuple[CameraConfig, ...] | None = None
    base_dims: int = 2

    def initial_robot(self, world: WorldState, cfg: SimConfig) -> RobotState:
        pose = Pose2D(*world.meta.get("start_pose", (0.0, 0.0, 0.0)))
        return neutral_state(cfg, pose)


def approach_pose(obj_xy: np.ndarray, from_xy: np.ndarray, dist: float = 0.55) -> tuple[np.ndarray, float]:
    """Base position and heading that put `obj_xy` at roughly (0, dist) in
    the base frame when approached from the direction of `from_xy`."""
    u = obj_xy - from_xy
    n = np.linalg.norm(u)
    u = u / n if n > 1e-9 else np.array([1.0, 0.0])
    pos = obj_xy - dist * u
    heading = wrap_angle(math.atan2(u[1], u[0]) - math.pi / 2.0)
    return pos, heading


# --- wipe -----------------------------------------------------------------


def _build_wipe(rng: np.random.Generator, cfg: SimConfig) -> WorldState:
    # both stations sit beyond arm reach from the start pose so the base leg
    # is mandatory, but close enough that open-loop error cannot compound long
    towel = np.array([0.7 + rng.uniform(-0.1, 0.1), rng.uniform(-0.3, 0.3)])
    glass = np.array([-0.7 + rng.uniform(-0.1, 0.1), rng.uniform(-0.25, 0.25)])
    ang = rng.uniform(0.0, 2.0 * math.pi)
    spill = glass + rng.uniform(0.16, 0.22) * np.array([math.cos(ang), math.sin(ang)])
    objects = {
        "spill": WorldObject("spill", spill, 0.17, GRAY["spill"], zone=True),
        "coaster": WorldObject("coaster", glass.copy(), 0.09, GRAY["coaster"], zone=True),
        "towel": WorldObject("towel", towel, 0.045, GRAY["towel"], graspable=True),
        "glass": WorldObject("glass", glass.copy(), 0.05, GRAY["glass"], graspable=True),
    }
    start = (rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), rng.uniform(-0.15, 0.15))
    return WorldState(
        objects,
        status={"wiped": False},
        meta={"glass_home": glass.tolist(), "start_pose": start},
    )


def _wipe_status(world: WorldState, robot: RobotState, cfg: SimConfig) -> None:
    towel = world.objects["towel"]
    glass = world.objects["glass"]
    spill = world.objects["spill"]
    if (
        towel.attached is not None
        and glass.attached is not None
        and np.linalg.norm(towel.pos - spill.pos) <= spill.radius
    ):
        world.status["wiped"] = True


def _wipe_grasped(world: WorldState) -> bool:
    return world.objects["towel"].attached is not None


def _wipe_wiped(world: WorldState) -> bool:
    return bool(world.status["wiped"])


def _wipe_placed(world: WorldState) -> bool:
    glass = world.objects["glass"]
    home = np.asarray(world.meta["glass_home"])
    return (
        bool(world.status["wiped"])
        and glass.attached is None
        and float(np.linalg.norm(glass.pos - home)) <= 0.1
    )


def _wipe_program(world: WorldState, cfg: SimConfig) -> list[Waypoint]:
    towel = world.objects["towel"].pos.copy()
    glass = world.objects["glass"].pos.copy()
    spill = world.objects["spill"].pos.copy()
    home = np.asarray(world.meta["glass_home"])
    start = np.asarray(world.meta["start_pose"][:2])

    t_pos, t_hdg = approach_pose(towel, start)
    g_pos, g_hdg = approach_pose(glass, t_pos)
    away = home - spill
    n = np.linalg.norm(away)
    away = away / n if n > 1e-9 else np.array([0.0, 1.0])
    lift = home + 0.18 * away
    carry = np.array([0.3, 0.9, -1.7, 0.0, 0.0, 0.0])[: cfg.n_joints]

    return [
        Waypoint("goto_towel", base_xy=t_pos, base_heading=t_hdg),
        Waypoint("reach_towel", ee={"right": towel}),
        Waypoint("grasp_towel", ee={"right": towel}, grip={"right": 0.0}),
        Waypoint("tuck_towel", arm_joints={"right": carry}, joint_tol=0.15),
        Waypoint("goto_glass", base_xy=g_pos, base_heading=g_hdg),
        Waypoint("reach_glass", ee={"left": glass}),
        Waypoint("grasp_glass", ee={"left": glass}, grip={"left": 0.0}),
        Waypoint("lift_glass", ee={"left": lift}, ee_tol=0.03),
        Waypoint("wipe", ee={"right": spill}, ee_tol=0.04),
        Waypoint("retract_towel", arm_joints={"right": carry}, joint_tol=0.2),
        Waypoint("return_glass", ee={"left": home}),
        Waypoint("release_glass", ee={"left": home}, grip={"left": 1.0}),
        Waypoint("retract", arm_joints={"left": carry}, joint_tol=0.3),
    ]


# --- push -----------------------------------------------------------------


def _build_push(n_pucks: int):
    def build(rng: np.random.Generator, cfg: SimConfig) -> WorldState:
        line_y = 1.3
        y0 = 0.55
        objects: dict[str, WorldObject] = {}
        for k in range(-8, 9):
            objects[f"post{k + 8}"] = WorldObject(
                f"post{k + 8}", np.array([0.2 * k, line_y]), 0.02, GRAY["post"], zone=True
            )
        for i in range(n_pucks):
            x = (i - (n_pucks - 1) / 2.0) * 0.5 + rng.uniform(-0.05, 0.05)
            y = y0 + rng.uniform(-0.05, 0.05)
            objects[f"puck{i}"] = WorldObject(
                f"puck{i}", np.array([x, y]), 0.09, GRAY["puck"], pushable=True
            )
        start = (rng.uniform(-0.05, 0.05), -0.6 + rng.uniform(-0.05, 0.05), math.pi / 2 + rng.uniform(-0.15, 0.15))
        return WorldState(objects, status={}, meta={"line_y": line_y, "n_pucks": n_pucks, "start_pose": start})

    return build


def _puck_past(i: int):
    def pred(world: WorldState) -> bool:
        return float(world.objects[f"puck{i}"].pos[1]) > world.meta["line_y"]

    return pred


def _push_program(world: WorldState, cfg: SimConfig) -> list[Waypoint]:
    line_y = world.meta["line_y"]
    wps: list[Waypoint] = []
    for i in range(world.meta["n_pucks"]):
        p = world.objects[f"puck{i}"].pos
        wps.append(Waypoint(f"stage{i}", base_xy=np.array([p[0], p[1] - 0.75]), base_heading=math.pi / 2))
        wps.append(
            Waypoint(
                f"push{i}",
                base_xy=np.array([p[0], line_y - 0.05]),
                base_heading=math.pi / 2,
                base_tol=0.06,
                heading_tol=0.25,
            )
        )
        wps.append(Waypoint(f"clear{i}", base_xy=np.array([p[0], p[1] - 0.75]), base_tol=0.1, heading_tol=3.2))
    return wps


# --- static pick-and-place --------------------------------------------------


def _distinct_gray(rng: np.random.Generator, taken, gap: int = 25) -> int:
    for _ in range(50):
        g = int(rng.integers(50, 211))
        if all(abs(g - t) >= gap for t in taken):
            return g
    return g


def _build_static_pick(rng: np.random.Generator, cfg: SimConfig) -> WorldState:
    obj = np.array([rng.uniform(-0.4, 0.4), rng.uniform(0.5, 0.85)])
    side = "left" if obj[0] < 0 else "right"
    mount = np.asarray(cfg.mount_left if side == "left" else cfg.mount_right)
    reach = cfg.n_joints * cfg.link_length - 0.05
    # lift-hold-replace scenes: pick the item up off its zone, keep it aloft
    # for a while, then set it back down in place instead of carrying it away
    replace = rng.random() < 0.35
    if replace:
        tgt = obj.copy()
    else:
        while True:
            tgt = np.array([rng.uniform(-0.45, 0.45), rng.uniform(0.45, 0.9)])
            if np.linalg.norm(tgt - obj) >= 0.3 and np.linalg.norm(tgt - mount) <= reach:
                break
    # per-scene palette: grays are drawn fresh each scene so the corpus spans
    # many appearances and the net cannot key tabletop habits to one shade
    item_gray = int(rng.integers(50, 211))
    zone_gray = _distinct_gray(rng, (item_gray,))
    objects = {
        "target": WorldObject("target", tgt, 0.1, zone_gray, zone=True),
        "item": WorldObject("item", obj, 0.05, item_gray, graspable=True),
    }
    if not replace and rng.random() < 0.5:
        # item starts sitting on a zone of its own, so "grasp an item that is
        # on a zone" appears in the corpus and not only "place and let go"
        objects["source"] = WorldObject("source", obj.copy(), 0.09, zone_gray, zone=True)
    meta = {"side": side, "start_pose": (0.0, 0.0, 0.0)}
    if replace:
        meta["dwell"] = int(rng.integers(60, 160))
    if rng.random() < 0.5:
        # bimanual variant: the free arm keeps a second item held out of the
        # way for the whole pick, mirroring the glass hold in the wipe task
        other = "right" if side == "left" else "left"
        o_mount = np.asarray(cfg.mount_right if side == "left" else cfg.mount_left)
        o_sign = -1.0 if other == "left" else 1.0
        for _ in range(50):
            prop = np.array([o_sign * rng.uniform(0.1, 0.45), rng.uniform(0.5, 0.85)])
            if (
                np.linalg.norm(prop - o_mount) <= reach
                and np.linalg.norm(prop - obj) >= 0.25
                and np.linalg.norm(prop - tgt) >= 0.25
            ):
                prop_gray = _distinct_gray(rng, (item_gray, zone_gray))
                objects["prop"] = WorldObject("prop", prop, 0.05, prop_gray, graspable=True)
                meta["hold_style"] = "tuck" if rng.random() < 0.5 else "lift"
                break
    return WorldState(objects, status={}, meta=meta)


def _pick_grasped(world: WorldState) -> bool:
    return world.objects["item"].attached is not None


def _pick_placed(world: WorldState) -> bool:
    item = world.objects["item"]
    tgt = world.objects["target"]
    return item.attached is None and float(np.linalg.norm(item.pos - tgt.pos)) <= tgt.radius


def _static_pick_program(world: WorldState, cfg: SimConfig) -> list[Waypoint]:
    side = world.meta["side"]
    item = world.objects["item"].pos.copy()
    tgt = world.objects["target"].pos.copy()
    carry = np.array([0.3, 0.9, -1.7, 0.0, 0.0, 0.0])[: cfg.n_joints]
    if "dwell" in world.meta:
        mount = np.asarray(cfg.mount_left if side == "left" else cfg.mount_right)
        up = mount - item
        up = up / max(float(np.linalg.norm(up)), 1e-9)
        pick = [
            Waypoint("reach", ee={side: item}),
            Waypoint("grasp", ee={side: item}, grip={side: 0.0}),
            Waypoint("hold_item", ee={side: item + 0.18 * up}, ee_tol=0.03,
                     dwell=world.meta["dwell"]),
            Waypoint("lower", ee={side: item}, ee_tol=0.03),
            Waypoint("release", ee={side: item}, grip={side: 1.0}),
            Waypoint("retract", arm_joints={side: carry}, joint_tol=0.3),
        ]
    else:
        pick = [
            Waypoint("reach", ee={side: item}),
            Waypoint("grasp", ee={side: item}, grip={side: 0.0}),
            Waypoint("move", ee={side: tgt}, ee_tol=0.03),
            Waypoint("release", ee={side: tgt}, grip={side: 1.0}),
            Waypoint("retract", arm_joints={side: carry}, joint_tol=0.3),
        ]
    if "prop" not in world.objects:
        return pick
    other = "right" if side == "left" else "left"
    prop = world.objects["prop"].pos.copy()
    o_mount = np.asarray(cfg.mount_right if side == "left" else cfg.mount_left)
    away = o_mount - prop
    away = away / max(float(np.linalg.norm(away)), 1e-9)
    if world.meta["hold_style"] == "tuck":
        hold = Waypoint("tuck_prop", arm_joints={other: carry}, joint_tol=0.15)
    else:
        hold = Waypoint("lift_prop", ee={other: prop + 0.18 * away}, ee_tol=0.03)
    return [
        Waypoint("reach_prop", ee={other: prop}),
        Waypoint("grasp_prop", ee={other: prop}, grip={other: 0.0}),
        hold,
        *pick,
        Waypoint("return_prop", ee={other: prop}),
        Waypoint("drop_prop", ee={other: prop}, grip={other: 1.0}),
        Waypoint("retract_prop", arm_joints={other: carry}, joint_tol=0.3),
    ]


def _make_push_spec(n: int) -> TaskSpec:
    return TaskSpec(
        name="push" if n == 3 else f"push{n}",
        static=False,
        horizon=400 + 420 * n,
        build=_build_push(n),
        sub_tasks=tuple((f"push_puck{i}", _puck_past(i)) for i in range(n)),
        expert_program=_push_program,
    )


TASKS: dict[str, TaskSpec] = {
    "wipe": TaskSpec(
        name="wipe",
        static=False,
        horizon=900,
        build=_build_wipe,
        sub_tasks=(
            ("grasp_towel", _wipe_grasped),
            ("lift_and_wipe", _wipe_wiped),
            ("place_glass", _wipe_placed),
        ),
        expert_program=_wipe_program,
        update_status=_wipe_status,
    ),
    "push": _make_push_spec(3),
    "push4": _make_push_spec(4),
    "push5": _make_push_spec(5),
    "static_pick": TaskSpec(
        name="static_pick",
        static=True,
        horizon=560,
        build=_build_static_pick,
        sub_tasks=(("grasp_item", _pick_grasped), ("place_item", _pick_placed)),
        expert_program=_static_pick_program,
        cameras=default_cameras(static=True),
        base_dims=0,
    ),
}


def get_task(name: str) -> TaskSpec:
    try:
        return TASKS[name]
    except KeyError:
        raise KeyError(f"unknown task {name!r}; available: {sorted(TASKS)}") from None

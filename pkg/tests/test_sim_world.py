import math

import numpy as np

from mobimanip.config import SimConfig, default_cameras
from mobimanip.sim import Simulator, get_task
from mobimanip.sim.geometry import Pose2D
from mobimanip.sim.render import render_view
from mobimanip.sim.robot import Action, fk_ee, neutral_state
from mobimanip.sim.world import WorldObject, WorldState

CFG = SimConfig()


def hold_action(sim, v=0.0, w=0.0):
    return Action(sim.robot.proprio(), np.array([v, w]))


def test_scene_randomization_is_seeded():
    a = Simulator(get_task("wipe"), seed=11)
    b = Simulator(get_task("wipe"), seed=11)
    c = Simulator(get_task("wipe"), seed=12)
    assert np.array_equal(a.world.objects["towel"].pos, b.world.objects["towel"].pos)
    assert not np.array_equal(a.world.objects["towel"].pos, c.world.objects["towel"].pos)


def test_episode_is_reproducible_end_to_end():
    def run():
        sim = Simulator(get_task("wipe"), seed=3)
        rng = np.random.default_rng(1)
        frames = []
        for _ in range(60):
            sim.step(Action(sim.robot.proprio() + rng.normal(0, 0.01, 14), rng.uniform(-1, 1, 2)))
            frames.append((sim.robot.base.x, sim.robot.base.y, sim.observe().rasters["top"].copy()))
        return frames

    for fa, fb in zip(run(), run()):
        assert fa[0] == fb[0] and fa[1] == fb[1]
        assert np.array_equal(fa[2], fb[2])


def test_grasp_attach_and_release():
    sim = Simulator(get_task("static_pick"), seed=5)
    item = sim.world.objects["item"]
    side = sim.world.meta["side"]
    # teleport-ish: servo EE onto the object with the scripted expert machinery
    from mobimanip.sim.robot import ik_solve

    q, ok = ik_solve(sim.robot.base, sim.robot.arm(side).joints, item.pos, sim.cfg, side, iters=300)
    assert ok
    arm = sim.robot.arm(side)
    arm.joints = q  # place arm directly; contact logic runs on step
    vec = sim.robot.proprio()
    off = 0 if side == "left" else 7
    vec[off + 6] = 0.0  # close gripper
    for _ in range(40):
        sim.step(Action(vec.copy(), np.zeros(2)))
    assert item.attached == side
    ee = fk_ee(sim.robot.base, sim.robot.arm(side).joints, sim.cfg, side)
    assert np.linalg.norm(item.pos - ee) < 1e-9
    vec[off + 6] = 1.0
    for _ in range(40):
        sim.step(Action(vec.copy(), np.zeros(2)))
    assert item.attached is None


def test_base_pushes_pucks_out_of_overlap():
    sim = Simulator(get_task("push"), seed=2)
    puck = sim.world.objects["puck1"]
    sim.robot.base = Pose2D(puck.pos[0], puck.pos[1] - 0.5, math.pi / 2)
    for _ in range(120):
        sim.step(hold_action(sim, v=0.8))
    d = np.linalg.norm(puck.pos - sim.robot.base.xy)
    assert d >= sim.cfg.base_radius + puck.radius - 1e-9
    assert puck.pos[1] > 0.6  # pushed forward


def test_zones_have_no_contact():
    sim = Simulator(get_task("wipe"), seed=1)
    spill = sim.world.objects["spill"]
    before = spill.pos.copy()
    sim.robot.base = Pose2D(spill.pos[0] - 0.3, spill.pos[1], 0.0)
    for _ in range(60):
        sim.step(hold_action(sim, v=0.8))
    assert np.array_equal(spill.pos, before)


def test_static_task_base_never_moves():
    sim = Simulator(get_task("static_pick"), seed=0)
    for _ in range(50):
        sim.step(hold_action(sim, v=1.5, w=1.5))
    assert sim.robot.base.x == 0.0 and sim.robot.base.y == 0.0 and sim.robot.base.theta == 0.0


def test_status_flags_are_monotone():
    sim = Simulator(get_task("wipe"), seed=4)
    from mobimanip.bench import make_expert_actor, run_episode

    actor, expert = make_expert_actor(sim, seed=4)
    trace = run_episode(sim, actor, stop=lambda: expert.done)
    seen = False
    for s in trace.snaps:
        if seen:
            assert s.status["wiped"]
        seen = seen or s.status["wiped"]
    assert seen


def test_camera_sets_match_task_kind():
    mobile = Simulator(get_task("wipe"), seed=0).observe()
    static = Simulator(get_task("static_pick"), seed=0).observe()
    assert set(mobile.rasters) == {"top", "lwrist", "rwrist"}
    assert set(static.rasters) == {"top", "lwrist", "rwrist", "front"}
    assert mobile.rasters["top"].shape == (64, 64)
    assert mobile.rasters["lwrist"].shape == (32, 32)
    assert mobile.rasters["top"].dtype == np.uint8


def test_render_is_pure_and_uses_pinned_levels():
    sim = Simulator(get_task("wipe"), seed=6)
    cam = sim.cameras[0]
    a = render_view(sim.world, sim.robot, sim.cfg, cam)
    b = render_view(sim.world, sim.robot, sim.cfg, cam)
    assert np.array_equal(a, b)
    vals = set(np.unique(a).tolist())
    assert 0 in vals and 255 in vals
    assert vals <= {0, 60, 90, 120, 150, 180, 210, 255}


def test_top_view_is_egocentric():
    # same base-relative scene at two different world poses renders identically
    def make(pose):
        rel = np.array([0.5, 0.4])
        world = WorldState({"o": WorldObject("o", pose.to_world(rel), 0.12, 150)})
        robot = neutral_state(CFG, pose)
        return render_view(world, robot, CFG, default_cameras()[0])

    img1 = make(Pose2D(0.0, 0.0, 0.0))
    img2 = make(Pose2D(1.3, -2.1, 2.1))
    assert np.array_equal(img1, img2)
    assert img1.max() == 255


def test_objects_visible_in_top_view():
    sim = Simulator(get_task("wipe"), seed=8)
    img = sim.observe().rasters["top"]
    # towel is ahead of the base within the 4 m window
    assert (img == 150).sum() >= 4

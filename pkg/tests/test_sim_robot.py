import math

import numpy as np
import pytest

from mobimanip.config import SimConfig
from mobimanip.sim.geometry import Pose2D
from mobimanip.sim.robot import (
    Action,
    InvalidActionError,
    NoiseModel,
    fk_ee,
    fk_points,
    ik_solve,
    jacobian,
    neutral_state,
    step,
)

CFG = SimConfig()


def fk_oracle(base, joints, cfg, side):
    """Independent FK via explicit 2x2 rotation-matrix products."""

    def rot(a):
        return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])

    mount = np.array(cfg.mount_left if side == "left" else cfg.mount_right)
    p = np.array([base.x, base.y]) + rot(base.theta) @ mount
    r = rot(base.theta) @ rot(cfg.mount_angle)
    for q in joints:
        r = r @ rot(q)
        p = p + r @ np.array([cfg.link_length, 0.0])
    return p


def test_fk_zero_joints_extends_along_base_y():
    ee = fk_ee(Pose2D(), np.zeros(6), CFG, "left")
    assert np.allclose(ee, [-0.2, 0.25 + 6 * 0.12], atol=1e-12)
    ee_r = fk_ee(Pose2D(), np.zeros(6), CFG, "right")
    assert np.allclose(ee_r, [0.2, 0.97], atol=1e-12)


def test_fk_base_rotation_reflects_through_origin():
    q = np.zeros(6)
    ee = fk_ee(Pose2D(0, 0, math.pi), q, CFG, "left")
    assert np.allclose(ee, [0.2, -0.97], atol=1e-9)


def test_fk_matches_matrix_product_oracle():
    rng = np.random.default_rng(3)
    for _ in range(100):
        base = Pose2D(*rng.uniform(-2, 2, 2), rng.uniform(-math.pi, math.pi))
        q = rng.uniform(-math.pi, math.pi, 6)
        side = "left" if rng.random() < 0.5 else "right"
        assert np.allclose(fk_ee(base, q, CFG, side), fk_oracle(base, q, CFG, side), atol=1e-10)


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(4)
    eps = 1e-6
    for _ in range(20):
        base = Pose2D(*rng.uniform(-1, 1, 2), rng.uniform(-3, 3))
        q = rng.uniform(-2, 2, 6)
        side = "right" if rng.random() < 0.5 else "left"
        jac = jacobian(base, q, CFG, side)
        for i in range(6):
            qp, qm = q.copy(), q.copy()
            qp[i] += eps
            qm[i] -= eps
            fd = (fk_ee(base, qp, CFG, side) - fk_ee(base, qm, CFG, side)) / (2 * eps)
            assert np.allclose(jac[:, i], fd, atol=1e-6)


def test_ik_reaches_random_reachable_targets():
    rng = np.random.default_rng(5)
    base = Pose2D(0.3, -0.2, 0.4)
    hits = 0
    for _ in range(40):
        side = "left" if rng.random() < 0.5 else "right"
        mount = np.array(CFG.mount_left if side == "left" else CFG.mount_right)
        r = rng.uniform(0.15, 0.65)
        a = rng.uniform(0, 2 * math.pi)
        target = base.to_world(mount + r * np.array([math.cos(a), math.sin(a)]))
        q0 = np.array([0.0, 0.8, -1.2, 0.3, 0.0, 0.0])
        q, ok = ik_solve(base, q0, target, CFG, side, iters=200)
        if ok:
            hits += 1
            assert np.linalg.norm(fk_ee(base, q, CFG, side) - target) < 1e-3
    assert hits >= 38


def test_step_is_deterministic_given_seed():
    def run():
        state = neutral_state(CFG)
        noise = NoiseModel.sampled(CFG, seed=7)
        rng = np.random.default_rng(0)
        out = []
        for _ in range(100):
            act = Action(rng.uniform(-1, 1, 14), rng.uniform(-1, 1, 2))
            state = step(state, act, CFG, noise)
            out.append((state.base.x, state.base.y, state.base.theta, state.base_vel.copy(), state.proprio()))
        return out

    a, b = run(), run()
    for ra, rb in zip(a, b):
        assert ra[0] == rb[0] and ra[1] == rb[1] and ra[2] == rb[2]
        assert np.array_equal(ra[3], rb[3])
        assert np.array_equal(ra[4], rb[4])


def test_arm_rate_limit_and_joint_clamp():
    state = neutral_state(CFG)
    targets = np.full(14, 10.0)  # far beyond limits
    act = Action(targets, np.zeros(2))
    nxt = step(state, act, CFG)
    dq = nxt.left.joints - state.left.joints
    assert np.max(np.abs(dq)) <= CFG.joint_rate_limit * CFG.dt + 1e-12
    for _ in range(500):
        nxt = step(nxt, act, CFG)
    assert np.all(nxt.left.joints <= CFG.joint_limit + 1e-12)
    assert nxt.left.gripper <= 1.0


def test_base_velocity_clamped_under_bias():
    noise = NoiseModel(tau=0.0, bias_v=0.5, bias_w=0.5)  # +50 percent bias
    state = neutral_state(CFG)
    act = Action(state.proprio(), np.array([CFG.v_max, CFG.w_max]))
    for _ in range(20):
        state = step(state, act, CFG, noise)
    # displacement per step bounded by clamped speed
    assert state.base.x <= CFG.v_max * CFG.dt * 20 + 1e-9


def test_first_order_lag_matches_closed_form():
    noise = NoiseModel(tau=0.1)
    state = neutral_state(CFG)
    act = Action(state.proprio(), np.array([1.0, 0.0]))
    for n in range(1, 30):
        state = step(state, act, CFG, noise)
        expect = 1.0 - math.exp(-n * CFG.dt / 0.1)
        assert abs(state.base_vel[0] - expect) < 1e-12


def test_zero_noise_tracks_commands_exactly():
    state = neutral_state(CFG)
    act = Action(state.proprio(), np.array([0.7, -0.3]))
    state = step(state, act, CFG, NoiseModel.zero())
    assert state.base_vel[0] == 0.7 and state.base_vel[1] == -0.3


def test_invalid_actions_raise():
    state = neutral_state(CFG)
    with pytest.raises(InvalidActionError):
        step(state, Action(np.zeros(13), np.zeros(2)), CFG)
    bad = Action(np.zeros(14), np.array([np.nan, 0.0]))
    with pytest.raises(InvalidActionError):
        step(state, bad, CFG)
    with pytest.raises(InvalidActionError):
        Action.from_vector(np.zeros(15))


def test_action_vector_round_trip():
    vec = np.arange(16.0)
    act = Action.from_vector(vec)
    assert np.array_equal(act.to_vector(), vec)

"""Acceptance suite: one test per pinned behavior, each ending in a single
PASS line with the measured numbers.

The heavy fixtures (scripted-demo corpora, full training sweeps) are
session-scoped; everything here runs from scratch on CPU with no recorded
artifacts checked in.  Run only this file with `pytest -m acceptance`.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from mobimanip.bench.success import SuccessTable
from mobimanip.bench.sweeps import (
    REGIME_CODES,
    SweepSettings,
    data_efficiency_sweep,
    regime_comparison,
    replay_drift_report,
)
from mobimanip.config import ExecConfig, RetrievalConfig, TrainConfig
from mobimanip.data.collect import ensure_demos
from mobimanip.data.corpus import Corpus
from mobimanip.data.stats import compute_norm_stats
from mobimanip.executor import ChunkExecutor
from mobimanip.nn.policy import chunk_loss, forward, init_params, loss_and_grads
from mobimanip.retrieval.index import VINNIndex
from mobimanip.training.sampler import MixtureSampler

from conftest import make_corpus

pytestmark = pytest.mark.acceptance


def ok(name: str, detail: str) -> None:
    print(f"\nACCEPT {name}: PASS ({detail})")


# -- shared corpora ---------------------------------------------------------


@pytest.fixture(scope="session")
def wipe50_dir(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("wipe50"))
    ensure_demos("wipe", 50, out, seed=0)
    return out


@pytest.fixture(scope="session")
def static200_dir(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("static200"))
    ensure_demos("static_pick", 200, out, seed=5000)
    return out


# -- mixture law ------------------------------------------------------------


def test_mixture_law_batch_composition():
    t0 = time.monotonic()
    mobile = make_corpus("mobile", n=3, t=40, seed=1)
    static = make_corpus("static", n=3, t=35, seed=61)
    stats = compute_norm_stats(mobile)
    n = 160_000
    fracs = {}
    for rho in (0.3, 0.5, 0.7):
        sampler = MixtureSampler(mobile, static, stats,
                                 TrainConfig(rho_static=rho), seed=7)
        draws = sampler.draw_indices(n)
        frac = sum(1 for origin, _, _ in draws if origin == "static") / n
        assert abs(frac - rho) <= 0.02, f"rho={rho}: fraction {frac:.4f}"
        fracs[rho] = frac
    dt = time.monotonic() - t0
    assert dt < 60.0
    ok("mixture law", ", ".join(f"rho {r:g} -> {f:.4f}" for r, f in fracs.items()) + f"; {dt:.1f}s")


# -- padding / normalization exactness ---------------------------------------


def test_static_padding_and_normalization_exactness(wipe50_dir, static200_dir):
    mobile = Corpus.from_dir(wipe50_dir)
    static = Corpus.from_dir(static200_dir)
    stats = compute_norm_stats(mobile)

    # every step of every static episode: normalized base label comes back
    # as exactly [0, 0], bit for bit
    for ep in static:
        denorm = stats.denormalize_action(stats.normalize_action(ep.actions()))
        assert np.all(denorm[:, 14:] == 0.0), ep.path

    # the sampler's assembled training samples take the same path
    sampler = MixtureSampler(mobile, static, stats,
                             TrainConfig(rho_static=1.0, batch_size=64), seed=3)
    batch = sampler.sample()
    assert batch.origins == ["static"] * 64
    denorm = stats.denormalize_action(batch.actions.reshape(-1, 16))
    assert np.all(denorm[:, 14:] == 0.0)

    # round trip over the full mobile corpus
    worst = 0.0
    for ep in mobile:
        a = ep.actions()
        rt = stats.denormalize_action(stats.normalize_action(a))
        worst = max(worst, float(np.max(np.abs(rt - a))))
    assert worst < 1e-9
    ok("padding/normalization exactness",
       f"static base exactly zero over {static.n_steps()} steps; "
       f"mobile round-trip max err {worst:.2e}")


# -- executor schedule -------------------------------------------------------


class _LedgerPolicy:
    """Chunks whose entries encode (query index, row index) for tracing."""

    def __init__(self, k: int):
        self.chunk_len = k
        self.queries = 0

    def predict(self, obs):
        k = self.chunk_len
        chunk = np.empty((k, 16))
        chunk[:, :14] = (1000 * self.queries + np.arange(k))[:, None]
        chunk[:, 14:] = (1000 * self.queries + np.arange(k))[:, None]
        self.queries += 1
        return chunk


def test_chunk_executor_schedule_matches_rule():
    t0 = time.monotonic()
    rng = np.random.default_rng(11)
    for trial in range(1000):
        k = int(rng.integers(1, 129))
        d = int(rng.integers(0, k))
        pol = _LedgerPolicy(k)
        ex = ChunkExecutor(pol, ExecConfig(chunk_len=k, base_delay=d))
        n_chunks = 3
        got = [ex.act(None) for _ in range(n_chunks * (k - d))]
        ledger = [(int(a[0]), int(a[15])) for a in got]
        expected = [
            (1000 * q + i, 1000 * q + i + d)
            for q in range(n_chunks)
            for i in range(k - d)
        ]
        assert ledger == expected, f"k={k} d={d}"
        if d == 0:
            assert all(arm == base for arm, base in ledger)
        assert ex.queries == n_chunks
    dt = time.monotonic() - t0
    ok("executor schedule", f"1000 random (k, d) ledgers match the rule; {dt:.1f}s")


# -- gradients ---------------------------------------------------------------


def _numeric_grad(params, batch, cfg, key, idx, eps=1e-4):
    out = []
    for sign in (+1.0, -1.0):
        p = {k: v.astype(np.float64).copy() for k, v in params.items()}
        p[key].reshape(-1)[idx] += sign * eps
        pred, _ = forward(p, batch.rasters, batch.proprio, cfg)
        loss, _ = chunk_loss(pred, batch.actions, batch.mask, cfg)
        out.append(loss)
    return (out[0] - out[1]) / (2 * eps)


def test_analytic_gradients_match_central_differences():
    t0 = time.monotonic()
    base = TrainConfig(chunk_len=3, batch_size=4, hidden=16, trunk=16, embed=8, pool_grid=4)
    variants = [
        base,
        replace(base, hidden=12, embed=6),
        replace(base, chunk_len=5),
        replace(base, mask_repeated=True),
        replace(base, hidden=24, pool_grid=2),
    ]
    worst = 0.0
    checked = 0
    for ci, cfg in enumerate(variants):
        mobile = make_corpus("mobile", n=3, t=20, seed=ci)
        stats = compute_norm_stats(mobile)
        sampler = MixtureSampler(mobile, None, stats, cfg, seed=ci)
        batch = sampler.sample(4)
        params = init_params(cfg, seed=ci + 1)
        _, grads = loss_and_grads(params, batch, cfg)
        rng = np.random.default_rng(100 + ci)
        keys = sorted(params)
        for _ in range(40):
            key = keys[rng.integers(len(keys))]
            idx = int(rng.integers(params[key].size))
            fd = _numeric_grad(params, batch, cfg, key, idx)
            an = grads[key].reshape(-1)[idx]
            rel = abs(fd - an) / max(abs(fd), abs(an), 1e-8)
            assert rel < 1e-4, f"net {ci} {key}[{idx}]: rel={rel:.2e}"
            worst = max(worst, rel)
            checked += 1
    dt = time.monotonic() - t0
    assert checked == 200 and dt < 60.0
    ok("gradient correctness", f"200 params over 5 nets, worst rel err {worst:.2e}; {dt:.1f}s")


# -- k-NN oracle -------------------------------------------------------------


def test_knn_retrieval_matches_exhaustive_scan():
    rng = np.random.default_rng(17)
    n, dim = 1000, 24
    keys = rng.normal(0, 1, (n, dim))
    # plant exact duplicates so distance ties are real
    for src, dsts in ((0, range(100, 120)), (5, range(500, 504))):
        keys[list(dsts)] = keys[src]
    refs = np.array([(i // 37, i % 37) for i in range(n)], dtype=np.int32)
    index = VINNIndex(keys, refs, corpus=None, encoder=None, stats=None,
                      cfg=RetrievalConfig())

    queries = list(rng.normal(0, 1, (50, dim)))
    queries += [keys[0].copy(), keys[5].copy(), keys[100].copy()]  # land on the tie groups
    for q in queries:
        d_all = np.sqrt(np.sum((keys - q) ** 2, axis=1))
        order = sorted(range(n), key=lambda i: (d_all[i], int(refs[i, 0]), int(refs[i, 1])))
        for k in (1, 5, 20):
            d, got = index.query_key(q, k)
            want = [tuple(refs[i]) for i in order[:k]]
            assert [tuple(r) for r in got] == want
            assert np.allclose(d, [d_all[i] for i in order[:k]], atol=1e-12)
    ok("k-NN oracle equivalence",
       "53 queries x k in {1, 5, 20} match the exhaustive scan, ties included")


# -- training sanity ---------------------------------------------------------


def test_bc_training_reduces_loss_deterministically(wipe50_dir):
    from mobimanip.bench.sweeps import fit_bc

    t0 = time.monotonic()
    mobile = Corpus.from_dir(wipe50_dir)
    cfg = SweepSettings(steps=5000).train_config(seed=3, rho=0.0)
    s1 = fit_bc(mobile, None, cfg, 5000, seed=3)
    s2 = fit_bc(mobile, None, cfg, 5000, seed=3)
    assert s1.history == s2.history, "identical seed must reproduce the loss curve exactly"
    initial, final = s1.history[0], s1.history[-1]
    reduction = 1.0 - final / initial
    dt = time.monotonic() - t0
    assert reduction >= 0.80, f"loss {initial:.4f} -> {final:.4f} ({reduction:.1%})"
    assert dt < 900.0
    ok("training sanity",
       f"loss {initial:.4f} -> {final:.4f} ({reduction:.1%} reduction) in 5000 steps, "
       f"deterministic; {dt:.0f}s")


# -- co-training directional effect ------------------------------------------


@pytest.fixture(scope="session")
def efficiency_report(wipe50_dir, static200_dir):
    t0 = time.monotonic()
    report = data_efficiency_sweep(wipe50_dir, static200_dir, counts=(25, 35, 50),
                                   seeds_by_count=None, settings=SweepSettings())
    report.notes["wall_s"] = round(time.monotonic() - t0, 1)
    return report


def test_cotraining_directional_effect_low_data(efficiency_report):
    r = efficiency_report
    whole = r.columns.index("whole")

    plain = r.select(demos=25, cotrain=REGIME_CODES["no_cotrain"])[:, whole]
    co = r.select(demos=25, cotrain=REGIME_CODES["cotrain"])[:, whole]
    assert len(plain) == 5 and len(co) == 5, "25-demo cell runs 5 seeds per regime"
    for count in (35, 50):
        for code in (0, 1):
            assert len(r.select(demos=count, cotrain=code)) == 3, f"missing {count}-demo cell"

    wall = r.notes["wall_s"]
    assert wall < 7200.0
    assert co.mean() >= plain.mean(), (
        f"co-trained mean {co.mean():.1f} < plain {plain.mean():.1f} at 25 demos"
    )
    cells = {
        f"{name}@{c}": r.notes["summary"][f"{name}@{c}"]["mean"]
        for c in (25, 35, 50)
        for name in ("no_cotrain", "cotrain")
    }
    ok("co-training directional effect",
       f"25 demos x 5 seeds x 20 episodes: cotrain {co.mean():.1f}% >= plain {plain.mean():.1f}%; "
       f"cells {cells}; {wall:.0f}s")


# -- pre-train vs co-train harness -------------------------------------------


def test_three_regime_report_runs_and_orders(wipe50_dir, static200_dir):
    report = regime_comparison(wipe50_dir, static200_dir, demos=25, seeds=(0,),
                               settings=SweepSettings())
    regime_col = report.columns.index("regime")
    seed_col = report.columns.index("seed")
    codes = sorted(set(report.rows[:, regime_col].astype(int)))
    assert codes == sorted(REGIME_CODES.values()), "all three regimes must run"
    by_regime = {c: set(report.rows[report.rows[:, regime_col] == c][:, seed_col].astype(int))
                 for c in codes}
    assert len(set(map(frozenset, by_regime.values()))) == 1, "identical seeds across regimes"
    order = report.notes["order"]
    assert sorted(order) == sorted(REGIME_CODES)
    means = {k: round(v, 1) for k, v in report.notes["means"].items()}
    ok("pre-train vs co-train harness",
       f"three regimes on identical seeds; report order {order}, means {means} "
       "(ordering is data, not a claim)")


# -- open-loop replay drift ---------------------------------------------------


def test_open_loop_replay_drift_and_bias_signature():
    t0 = time.monotonic()
    base = replay_drift_report(20, seed=0)
    mean = base.notes["mean_terminal_ee_error_m"]
    zero = base.notes["zero_noise_error_m"]
    assert mean >= 0.05
    assert mean >= 5.0 * zero

    left = {}
    for bias in (+0.12, -0.12):
        rep = replay_drift_report(8, seed=1, bias_w=bias)
        left[bias] = rep.notes["mean_left_offset_m"]
        assert np.sign(left[bias]) == np.sign(bias), (
            f"bias {bias:+}: lateral centroid {left[bias]:+.3f}"
        )
    dt = time.monotonic() - t0
    assert dt < 60.0
    ok("replay drift",
       f"mean terminal error {mean:.3f} m (zero-noise {zero:.1e}), "
       f"lateral centroid {left[0.12]:+.3f}/{left[-0.12]:+.3f} m for bias +/-0.12; {dt:.1f}s")


# -- sub-task accounting ------------------------------------------------------


def test_subtask_accounting_identity():
    from mobimanip.sim.tasks import get_task

    task = get_task("wipe")
    rng = np.random.default_rng(23)
    for _ in range(200):
        n_eps = int(rng.integers(1, 40))
        outcomes = []
        for _ in range(n_eps):
            row, alive = [], True
            for _ in range(3):
                if not alive:
                    row.append(None)
                    continue
                s = bool(rng.random() < 0.7)
                row.append(s)
                alive = s
            outcomes.append(row)
        table = SuccessTable.from_outcomes(task, outcomes)
        product = 100.0
        for s, a in zip(table.successes, table.attempts):
            product *= s / a if a else 0.0
        direct = 100.0 * sum(1 for row in outcomes if all(x is True for x in row)) / n_eps
        assert abs(table.whole_task_rate() - product) < 1e-9
        assert abs(table.whole_task_rate() - direct) < 1e-9

    # the bimanual wipe reference row: 100, 95, 100 percent -> 95 whole
    outcomes = [[True, True, True]] * 19 + [[True, False, None]]
    table = SuccessTable.from_outcomes(task, outcomes)
    assert table.attempts == [20, 20, 19] and table.successes == [20, 19, 19]
    assert table.conditional_rates() == [100.0, 95.0, 100.0]
    assert table.whole_task_rate() == 95.0
    ok("sub-task accounting",
       "product == direct count on 200 random tables; reference row 100/95/100 -> 95 exact")


# -- teleop round trip (needs only the service, not the browser UI) ----------


@pytest.mark.secondary
def test_teleop_round_trip_over_localhost(tmp_path):
    import asyncio
    import json as _json

    import uvicorn
    import websockets

    from mobimanip.cli import main
    from mobimanip.config import SimConfig
    from mobimanip.data.episode import load_episode
    from mobimanip.service import create_app
    from mobimanip.sim.robot import Action, NoiseModel
    from mobimanip.sim.tasks import get_task
    from mobimanip.sim.world import Simulator

    app = create_app(task_name="wipe", data_dir=str(tmp_path), seed=77, rate_hz=50.0)
    config = uvicorn.Config(app, host="127.0.0.1", port=8733, log_level="error")
    server = uvicorn.Server(config)

    async def drive_session():
        import threading

        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        for _ in range(100):
            if server.started:
                break
            await asyncio.sleep(0.05)
        assert server.started

        frames = []
        stats = {"sent": 0}
        async with websockets.connect("ws://127.0.0.1:8733/session", max_size=2**22) as ws:
            hello = _json.loads(await ws.recv())
            assert hello["type"] == "hello"

            async def reader():
                while True:
                    msg = _json.loads(await ws.recv())
                    if msg["type"] == "frame":
                        frames.append(msg)

            rtask = asyncio.create_task(reader())
            loop = asyncio.get_running_loop()
            dt = 1.0 / 50.0
            rng = np.random.default_rng(9)
            next_t = loop.time()
            for i in range(520):
                cmd = {"seq": i, "v": 0.5 * np.sin(i / 60.0), "w": 0.3 * np.cos(i / 45.0),
                       "left": {"dx": float(rng.normal(0, 0.004)), "dy": float(rng.normal(0, 0.004))}}
                if i == 10:
                    cmd["record"] = True
                if i == 510:
                    cmd["record"] = False
                await ws.send(_json.dumps(cmd))
                stats["sent"] += 1
                next_t += dt
                delay = next_t - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
            for _ in range(100):
                if frames and frames[-1].get("episode_path"):
                    break
                await asyncio.sleep(0.02)
            rtask.cancel()
        server.should_exit = True
        thread.join(timeout=5)
        return frames

    frames = asyncio.run(drive_session())
    assert len(frames) > 400

    # sustained 50 Hz: at most 1 coalesced tick per 500 commands
    applied = [f for f in frames if f["seq_applied"] is not None]
    window = [f for f in applied if 10 <= f["seq_applied"] <= 510]
    coalesced_delta = window[-1]["coalesced"] - window[0]["coalesced"]
    assert coalesced_delta <= 1, f"{coalesced_delta} coalesced ticks in a 500-command window"

    path = frames[-1]["episode_path"]
    assert path is not None

    # parses under the inspection CLI
    assert main(["inspect", path]) == 0

    # replays in noise-free sim within 1e-3 m terminal base error
    ep = load_episode(path)
    assert ep.origin == "mobile"
    sim = Simulator(get_task("wipe"), cfg=SimConfig(), seed=ep.header["seed"],
                    noise=NoiseModel.zero())
    acts = ep.actions()
    worst = 0.0
    for t in range(ep.n_steps):
        pose = np.array([sim.robot.base.x, sim.robot.base.y])
        worst = max(worst, float(np.linalg.norm(pose - ep.base_pose[t][:2])))
        sim.step(Action.from_vector(acts[t]))
    assert worst <= 1e-3

    # accepted by the training pipeline as a mobile-origin demo
    corpus = Corpus([ep])
    stats = compute_norm_stats(corpus)
    sampler = MixtureSampler(corpus, None, stats, TrainConfig(batch_size=4), seed=0)
    batch = sampler.sample()
    assert batch.origins == ["mobile"] * 4
    params = init_params(TrainConfig(), seed=0)
    loss, grads = loss_and_grads(params, batch, TrainConfig())
    assert np.isfinite(loss)
    ok("teleop round trip",
       f"{ep.n_steps}-step recording: inspect ok, replay err {worst:.2e} m, "
       f"trains as mobile; {coalesced_delta} coalesced per 500 at 50 Hz")

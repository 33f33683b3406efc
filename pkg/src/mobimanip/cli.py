"""Command-line entry point.

Subcommands wrap the library directly (collection, training, evaluation,
sweeps, replay drift, episode inspection); `teleop` starts the WebSocket
session service.  Episode directories default to MOBIMANIP_DATA_DIR.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .config import RetrievalConfig, SimConfig, TrainConfig, data_dir


def _add_collect(sub):
    p = sub.add_parser("collect", help="record scripted-expert demonstrations")
    p.add_argument("--task", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="episode directory (default: data dir/task)")
    p.set_defaults(func=_cmd_collect)


def _cmd_collect(args) -> int:
    from .data.collect import collect_demos

    out = args.out or os.path.join(data_dir(), args.task)
    corpus = collect_demos(args.task, args.n, out, seed=args.seed,
                           manifest=os.path.join(out, "manifest.txt"))
    print(f"collected {len(corpus)} episodes in {out}")
    return 0


def _add_teleop(sub):
    p = sub.add_parser("teleop", help="serve a live teleop session")
    p.add_argument("--task", default="wipe")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8710)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--rate-hz", type=float, default=50.0)
    p.add_argument("--data-dir", default=None)
    p.add_argument("--frontend", default=None, help="directory of built UI assets to serve at /")
    p.set_defaults(func=_cmd_teleop)


def _cmd_teleop(args) -> int:
    import uvicorn

    from .service import create_app

    frontend = args.frontend
    if frontend is None:
        guess = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(__file__))),
                             "frontend")
        frontend = guess if os.path.isdir(os.path.join(guess, "dist")) else None
    app = create_app(task_name=args.task, data_dir=args.data_dir, seed=args.seed,
                     rate_hz=args.rate_hz, frontend_dir=frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _add_train(sub):
    p = sub.add_parser("train", help="train a policy on recorded demonstrations")
    p.add_argument("--algo", choices=("bc", "vinn"), default="bc")
    p.add_argument("--demos", required=True, help="mobile episode directory")
    p.add_argument("--static", default=None, help="static episode directory for co-training")
    p.add_argument("--rho", type=float, default=None, help="static mixture weight")
    p.add_argument("--n-demos", type=int, default=None, help="use only the first N episodes")
    p.add_argument("--steps", type=int, default=None,
                   help="bc: optimizer steps (default 5000); vinn: encoder epochs")
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--pool-grid", type=int, default=None)
    p.add_argument("--gripper-weight", type=float, default=None,
                   help="loss weight on the gripper action columns")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="checkpoint path")
    p.set_defaults(func=_cmd_train)


def _cmd_train(args) -> int:
    from .data.corpus import Corpus

    mobile = Corpus.from_dir(args.demos)
    if len(mobile) == 0:
        raise SystemExit(f"no episodes found in {args.demos}")
    if args.n_demos:
        mobile = mobile.subset(args.n_demos)
    rho = TrainConfig().rho_static if args.rho is None else args.rho
    static = None
    if args.static is not None:
        static = Corpus.from_dir(args.static)
    if rho > 0 and args.algo == "bc" and (static is None or len(static) == 0):
        raise SystemExit(
            f"co-training with rho={rho:g} needs a static corpus: pass --static DIR "
            "(or set --rho 0 for plain behavior cloning)"
        )

    if args.algo == "bc":
        from .bench.sweeps import fit_bc
        from .nn.train import save_state

        overrides = {"rho_static": rho, "seed": args.seed}
        if args.lr is not None:
            overrides["lr"] = args.lr
        if args.pool_grid is not None:
            overrides["pool_grid"] = args.pool_grid
        if args.gripper_weight is not None:
            overrides["gripper_weight"] = args.gripper_weight
        cfg = TrainConfig(**overrides)
        state = fit_bc(mobile, static, cfg, args.steps or 5000, args.seed)
        out = args.out or os.path.join(data_dir(), f"bc_seed{args.seed}.ckpt")
        os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
        save_state(out, state)
        print(f"final loss {state.history[-1]:.4f} after {state.step} steps -> {out}")
        return 0

    from .data.stats import compute_norm_stats
    from .retrieval.encoder import collect_frames, train_encoder
    from .retrieval.index import VINNIndex

    stats = compute_norm_stats(mobile.episodes)
    frames = collect_frames(mobile)
    enc, losses = train_encoder(frames, RetrievalConfig(seed=args.seed), seed=args.seed,
                                epochs=args.steps)
    index = VINNIndex.build(mobile, enc, stats)
    out = args.out or os.path.join(data_dir(), f"vinn_seed{args.seed}.npz")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    index.save(out)
    print(f"encoder loss {losses[-1]:.4f}, {len(index.keys)} keys -> {out}")
    return 0


def load_policy(path: str):
    """BC checkpoint (.ckpt) or VINN index (.npz) -> executable policy."""
    if path.endswith(".npz"):
        from .retrieval.index import VINNIndex, VINNPolicy

        return VINNPolicy(VINNIndex.load(path))
    from .nn.policy import BCPolicy
    from .nn.train import load_state

    state = load_state(path)
    return BCPolicy(state.params, state.stats, state.cfg, views=state.views, feat=state.feat)


def _add_eval(sub):
    p = sub.add_parser("eval", help="closed-loop policy evaluation")
    p.add_argument("--policy", required=True, help="checkpoint (.ckpt) or VINN index (.npz)")
    p.add_argument("--task", default="wipe")
    p.add_argument("--episodes", type=int, default=20)
    p.add_argument("--seed0", type=int, default=500)
    p.set_defaults(func=_cmd_eval)


def _cmd_eval(args) -> int:
    from .bench.sweeps import eval_policy

    policy = load_policy(args.policy)
    table = eval_policy(policy, args.task, args.episodes, args.seed0)
    print(table.format())
    return 0


def _add_sweep(sub):
    p = sub.add_parser("sweep", help="run an experiment harness and write a report")
    p.add_argument("which", choices=("efficiency", "mixture", "pretrain"))
    p.add_argument("--mobile", required=True, help="mobile episode directory")
    p.add_argument("--static", required=True, help="static episode directory")
    p.add_argument("--out", required=True, help="report file path")
    p.add_argument("--counts", type=int, nargs="+", default=(25, 35, 50))
    p.add_argument("--rhos", type=float, nargs="+", default=(0.3, 0.5, 0.7))
    p.add_argument("--demos", type=int, default=25, help="demo count for the pretrain comparison")
    p.add_argument("--seeds", type=int, nargs="+", default=(0, 1, 2))
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--n-eval", type=int, default=None)
    p.set_defaults(func=_cmd_sweep)


def _cmd_sweep(args) -> int:
    from .bench.sweeps import (SweepSettings, data_efficiency_sweep, mixture_sweep,
                               regime_comparison)

    overrides = {}
    if args.steps is not None:
        overrides["steps"] = args.steps
    if args.n_eval is not None:
        overrides["n_eval"] = args.n_eval
    settings = SweepSettings(**overrides)
    if args.which == "efficiency":
        seeds = {c: tuple(args.seeds) for c in args.counts}
        report = data_efficiency_sweep(args.mobile, args.static, tuple(args.counts),
                                       seeds, settings)
    elif args.which == "mixture":
        report = mixture_sweep(args.mobile, args.static, tuple(args.rhos),
                               tuple(args.seeds), settings)
    else:
        report = regime_comparison(args.mobile, args.static, args.demos,
                                   tuple(args.seeds), settings)
    report.save(args.out)
    print(f"wrote {report.kind} report ({len(report.rows)} rows) to {args.out}")
    if report.notes.get("order"):
        print("regime order:", " > ".join(report.notes["order"]))
    return 0


def _add_replay_drift(sub):
    p = sub.add_parser("replay-drift", help="open-loop replay scatter of the turn probe")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bias-w", type=float, default=None)
    p.add_argument("--out", default=None, help="write scatter report here")
    p.set_defaults(func=_cmd_replay_drift)


def _cmd_replay_drift(args) -> int:
    from .bench.sweeps import replay_drift_report

    report = replay_drift_report(args.n, args.seed, args.bias_w)
    print(json.dumps(report.notes, indent=2))
    if args.out:
        report.save(args.out)
        print(f"wrote scatter data to {args.out}")
    return 0


def _add_inspect(sub):
    p = sub.add_parser("inspect", help="print an episode's header and shapes")
    p.add_argument("path")
    p.set_defaults(func=_cmd_inspect)


def _cmd_inspect(args) -> int:
    from .data.episode import load_episode

    ep = load_episode(args.path)
    print(json.dumps(ep.header, indent=2, sort_keys=True))
    print(f"proprio {ep.proprio.shape}  arms {ep.action_arms.shape}  "
          f"base {ep.action_base.shape}")
    for name, r in ep.rasters.items():
        print(f"raster {name}: {r.shape} {r.dtype}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("MOBIMANIP_LOGLEVEL", "INFO"),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(prog="mobimanip")
    sub = parser.add_subparsers(dest="cmd", required=True)
    for add in (_add_collect, _add_teleop, _add_train, _add_eval, _add_sweep,
                _add_replay_drift, _add_inspect):
        add(sub)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as e:
        if e.code not in (0, None) and isinstance(e.code, str):
            print(f"error: {e.code}", file=sys.stderr)
            return 1
        raise
    except (OSError, ValueError, KeyError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

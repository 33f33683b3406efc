"""Training loops: plain behavior cloning and pretrain-then-finetune."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..config import TrainConfig
from ..data.corpus import Corpus
from ..data.stats import NormStats
from ..training.sampler import VIEWS, MixtureSampler
from .optim import AdamW
from .policy import FeatureStats, fit_feature_stats, init_params, loss_and_grads

log = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    def __init__(self, step: int, loss: float, initial: float, history: list[float]):
        super().__init__(
            f"training diverged at step {step}: loss {loss:.3e} vs initial {initial:.3e}"
        )
        self.step = step
        self.loss = loss
        self.initial = initial
        self.history = history


@dataclass
class TrainState:
    params: dict
    opt: AdamW
    cfg: TrainConfig
    stats: NormStats
    views: tuple = VIEWS
    feat: FeatureStats | None = None
    step: int = 0
    history: list[float] = field(default_factory=list)

    @classmethod
    def create(cls, cfg: TrainConfig, stats: NormStats, views=VIEWS, seed: int | None = None,
               feat: FeatureStats | None = None) -> "TrainState":
        params = init_params(cfg, views, seed)
        opt = AdamW(params, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay)
        return cls(params=params, opt=opt, cfg=cfg, stats=stats, views=views, feat=feat)


def make_train_state(cfg: TrainConfig, stats: NormStats, episodes, views=VIEWS,
                     seed: int | None = None) -> TrainState:
    """TrainState with input whitening fitted over the given episodes."""
    feat = fit_feature_stats(list(episodes), cfg, views)
    return TrainState.create(cfg, stats, views, seed, feat=feat)


def train(state: TrainState, sampler: MixtureSampler, steps: int, log_every: int = 500) -> list[float]:
    """Run `steps` optimizer updates; aborts on divergence."""
    initial = None
    t0 = time.time()
    for _ in range(steps):
        batch = sampler.sample()
        loss, grads = loss_and_grads(state.params, batch, state.cfg, state.views, state.feat)
        if initial is None:
            initial = state.history[0] if state.history else loss
        if loss > state.cfg.divergence_factor * max(initial, 1e-12):
            raise DivergenceError(state.step, loss, initial, state.history)
        state.opt.update(state.params, grads)
        state.history.append(loss)
        state.step += 1
        if log_every and state.step % log_every == 0:
            rate = state.step / max(time.time() - t0, 1e-9)
            log.info("step %d  loss %.4f  (%.1f steps/s)", state.step, loss, rate)
    return state.history


def pretrain_then_finetune(
    static: Corpus,
    mobile: Corpus,
    stats: NormStats,
    cfg: TrainConfig,
    pretrain_steps: int,
    finetune_steps: int,
    seed: int | None = None,
) -> TrainState:
    """Static-only phase followed by mobile-only finetuning of the same state.

    Normalization comes from the mobile corpus in both phases.
    """
    combined = list(getattr(mobile, "episodes", mobile)) + list(getattr(static, "episodes", static) or [])
    state = make_train_state(cfg, stats, combined, seed=seed)
    pre_sampler = MixtureSampler(mobile, static, stats, _with_rho(cfg, 1.0), seed=seed)
    train(state, pre_sampler, pretrain_steps)
    fine_sampler = MixtureSampler(mobile, None, stats, _with_rho(cfg, 0.0), seed=None if seed is None else seed + 1)
    train(state, fine_sampler, finetune_steps)
    return state


def _with_rho(cfg: TrainConfig, rho: float) -> TrainConfig:
    from dataclasses import replace

    return replace(cfg, rho_static=rho)


def save_state(path: str, state: TrainState) -> None:
    from .checkpoint import save_checkpoint

    extra = {"step": state.step}
    if state.feat is not None:
        extra["feature_stats"] = state.feat.to_json()
    save_checkpoint(path, state.params, state.cfg, state.stats, state.views,
                    state.opt.state_arrays(), extra)


def load_state(path: str) -> TrainState:
    from .checkpoint import load_checkpoint

    params, cfg, stats, views, opt_arrays, extra = load_checkpoint(path)
    opt = AdamW(params, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay)
    if opt_arrays:
        opt.load_state_arrays(opt_arrays)
    feat = None
    if "feature_stats" in extra:
        feat = FeatureStats.from_json(extra["feature_stats"])
    return TrainState(params=params, opt=opt, cfg=cfg, stats=stats, views=views,
                      feat=feat, step=int(extra.get("step", 0)))

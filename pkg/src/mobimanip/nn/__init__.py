from .policy import BCPolicy, init_params, forward, loss_and_grads
from .optim import AdamW
from .train import DivergenceError, TrainState, train, pretrain_then_finetune
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "AdamW",
    "BCPolicy",
    "DivergenceError",
    "TrainState",
    "forward",
    "init_params",
    "load_checkpoint",
    "loss_and_grads",
    "pretrain_then_finetune",
    "save_checkpoint",
    "train",
]

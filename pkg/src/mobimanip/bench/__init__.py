from .rollout import Trace, run_episode, make_expert_actor
from .success import SuccessTable, evaluate_subtasks

__all__ = [
    "SuccessTable",
    "Trace",
    "evaluate_subtasks",
    "make_expert_actor",
    "run_episode",
]

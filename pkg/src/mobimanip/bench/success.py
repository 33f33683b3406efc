"""Sub-task outcome extraction and success accounting.

A sub-task is attempted only if the previous one succeeded, so its
conditional rate is #successes / #attempts where #attempts equals the
previous sub-task's success count.  The whole-task rate is the product of
the conditional rates, which telescopes to the direct fraction of episodes
whose final sub-task succeeded.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..sim.tasks import TaskSpec
from ..sim.world import WorldState


def evaluate_subtasks(snaps: list[WorldState], task: TaskSpec) -> list[bool | None]:
    """Per-sub-task outcome for one episode: True/False, or None if never
    attempted because an earlier sub-task failed.

    Each predicate must first hold at or after the step where the previous
    sub-task first held, so out-of-order completions do not count.
    """
    outcomes: list[bool | None] = []
    start = 0
    alive = True
    for _name, pred in task.sub_tasks:
        if not alive:
            outcomes.append(None)
            continue
        hit = next((i for i in range(start, len(snaps)) if pred(snaps[i])), None)
        if hit is None:
            outcomes.append(False)
            alive = False
        else:
            outcomes.append(True)
            start = hit
    return outcomes


@dataclass
class SuccessTable:
    task: str
    names: list[str]
    attempts: list[int]
    successes: list[int]

    @classmethod
    def from_outcomes(cls, task: TaskSpec, episodes: list[list[bool | None]]) -> "SuccessTable":
        names = [name for name, _ in task.sub_tasks]
        attempts = [len(episodes)] + [0] * (len(names) - 1)
        successes = [0] * len(names)
        for eps in episodes:
            for i, out in enumerate(eps):
                if out is True:
                    successes[i] += 1
        for i in range(1, len(names)):
            attempts[i] = successes[i - 1]
        return cls(task.name, names, attempts, successes)

    def conditional_rates(self) -> list[float]:
        return [
            100.0 * s / a if a > 0 else 0.0 for s, a in zip(self.successes, self.attempts)
        ]

    def whole_task_rate(self) -> float:
        rate = 1.0
        for s, a in zip(self.successes, self.attempts):
            if a == 0:
                return 0.0
            rate *= s / a
        return 100.0 * rate

    def format(self) -> str:
        def fmt(x: float) -> str:
            return f"{x:.0f}" if abs(x - round(x)) < 1e-9 else f"{x:.1f}"

        parts = [
            f"{n}={fmt(r)} ({s}/{a})"
            for n, r, s, a in zip(self.names, self.conditional_rates(), self.successes, self.attempts)
        ]
        return f"[{self.task}] " + "  ".join(parts) + f"  whole={fmt(self.whole_task_rate())}"

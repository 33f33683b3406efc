from .geometry import Pose2D, wrap_angle
from .robot import (
    Action,
    ArmState,
    InvalidActionError,
    NoiseModel,
    RobotState,
    fk_points,
    ik_step,
    jacobian,
    step,
)
from .world import Simulator, WorldObject, WorldState
from .tasks import TASKS, TaskSpec, get_task
from .expert import ScriptedExpert

__all__ = [
    "Action",
    "ArmState",
    "InvalidActionError",
    "NoiseModel",
    "Pose2D",
    "RobotState",
    "ScriptedExpert",
    "Simulator",
    "TASKS",
    "TaskSpec",
    "WorldObject",
    "WorldState",
    "fk_points",
    "get_task",
    "ik_step",
    "jacobian",
    "step",
    "wrap_angle",
]

"""Tabular Q-learning synthesis of state-preparation circuits over discretized phase states."""

from .actions import Action, GateKind, GateSet, enumerate_actions
from .circuits import Circuit, CircuitMetrics, metrics, simulate_full
from .errors import SweetqError
from .qlearn import Problem, TrainConfig, synthesize
from .sweet import PhaseGrid, SweetState, apply_gate

__all__ = [
    "Action", "GateKind", "GateSet", "enumerate_actions",
    "Circuit", "CircuitMetrics", "metrics", "simulate_full",
    "SweetqError", "Problem", "TrainConfig", "synthesize",
    "PhaseGrid", "SweetState", "apply_gate",
]
__version__ = "0.1.0"

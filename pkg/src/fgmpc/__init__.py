"""Fast-gradient MPC with on-line adaptation of the solver iteration budget."""

__version__ = "0.1.0"

from .closedloop import ClosedLoop, ExtendedState, ScenarioConfig, run_scenario, warm_start_shift
from .cost import CondensedCost, ControlParameter, ReferenceSignal, momentum_constant
from .monitor import MonitorState, update_q
from .plant import DisturbanceSequence, LinearPlant, discretize_triple_integrator, predict, simulate_real
from .solver import IterationLog, SolverConfig, fast_gradient, project_box, solve_to_tolerance
from .trace import IntervalRecord, Trace, read_trace, write_trace

__all__ = [
    "ClosedLoop", "CondensedCost", "ControlParameter", "DisturbanceSequence", "ExtendedState",
    "IntervalRecord", "IterationLog", "LinearPlant", "MonitorState", "ReferenceSignal",
    "ScenarioConfig", "SolverConfig", "Trace", "discretize_triple_integrator", "fast_gradient",
    "momentum_constant", "predict", "project_box", "read_trace", "run_scenario",
    "simulate_real", "solve_to_tolerance", "update_q", "warm_start_shift", "write_trace",
]

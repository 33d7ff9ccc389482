"""Named scenarios for the benchmark figures and the single-instant solver sweep."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .closedloop import ClosedLoop, ScenarioConfig
from .solver import SolverConfig, fast_gradient

PRESETS = {
    "fig2": dict(adaptive=True, q_init=2, horizon=200),
    "fig3": dict(adaptive=True, q_init=100, horizon=200),
    "fig4": dict(adaptive=False, q_init=2, horizon=200),
    "fig5": dict(adaptive=False, q_init=100, horizon=200),
    "fig6": dict(adaptive=False, q_init=20, horizon=200),
    "fig7": dict(adaptive=False, q_init=20, horizon=100),
    "fig8": dict(adaptive=True, q_init=20, horizon=100),
}
CLOSED_LOOP_PRESETS = tuple(PRESETS)
ALL_PRESETS = ("fig1",) + CLOSED_LOOP_PRESETS

# Interval of the fig2 run whose solver problem is used for the sweep.
FIG1_INTERVAL = 120
FIG1_ITERATIONS = 100
FIG1_VARIANTS = (
    ("pure_gradient", 0, None),
    ("no_restart", "tuned", None),
    ("s_max_5", "tuned", 5),
    ("s_max_8", "tuned", 8),
)


def preset_config(name: str, **overrides) -> ScenarioConfig:
    if name == "fig1":
        name = "fig2"
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(ALL_PRESETS)}")
    return ScenarioConfig(**{**PRESETS[name], **overrides})


@dataclass
class SolverInstance:
    engine: ClosedLoop
    p_plus: object
    x_hat: np.ndarray
    k0: int
    interval: int


def snapshot(config: ScenarioConfig, interval: int = FIG1_INTERVAL) -> SolverInstance:
    """Advance the closed loop ``interval`` intervals and freeze the next solver problem."""
    engine = ClosedLoop(config)
    state = engine.initial_state()
    for _ in range(interval):
        if config.duration - state.t < state.q:
            raise ValueError(f"scenario ends before interval {interval}")
        state = engine.step(state)[0]
    p_plus, x_hat, k0 = engine.solver_instance(state)
    return SolverInstance(engine, p_plus, x_hat, k0, interval)


@dataclass
class SweepResult:
    instance: SolverInstance
    costs: dict          # variant -> array of J(p(0)) .. J(p(q))
    restarts: dict

    def relative_decrease(self) -> dict:
        return {k: (v - v[0]) / abs(v[0]) for k, v in self.costs.items()}


def solver_sweep(config: ScenarioConfig | None = None, interval: int = FIG1_INTERVAL,
                 iterations: int = FIG1_ITERATIONS, variants=FIG1_VARIANTS) -> SweepResult:
    """Cost curves of several solver variants on one frozen problem."""
    inst = snapshot(config or preset_config("fig1"), interval)
    eng = inst.engine
    costs, restarts = {}, {}
    for name, c, s_max in variants:
        c_val = eng.solver.c if c == "tuned" else float(c)
        cfg = SolverConfig(L=eng.solver.L, c=c_val, s_max=s_max)
        _, it_log = fast_gradient(eng.cost, inst.x_hat, inst.k0, inst.p_plus, iterations, cfg)
        costs[name] = np.array(it_log.costs)
        restarts[name] = list(it_log.restart_indices)
    return SweepResult(inst, costs, restarts)

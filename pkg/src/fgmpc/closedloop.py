"""Distributed-in-time MPC: apply stored controls while the solver works on
the predicted next state, then let the monitor pick the next budget."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass

import numpy as np

from . import __version__
from .cost import CondensedCost, ControlParameter, ReferenceSignal, momentum_constant
from .errors import ScenarioAborted
from .monitor import MonitorState, update_q
from .plant import DisturbanceSequence, discretize_triple_integrator, rollout
from .solver import SolverConfig, fast_gradient
from .trace import IntervalRecord, Trace

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one closed-loop run.

    Defaults are the triple-integrator benchmark: tau = 0.02 s, Q = 100,
    R = 1, s_max = 8, q_max = 100, delta = 10, N = 200.
    """

    # plant
    tau_c: float = 0.02
    disturbance: tuple = ()
    disturbance_start: int = 0
    disturbance_stop: int = 0
    # cost
    horizon: int = 200
    Q: float = 100.0
    R: float = 1.0
    J_floor: float = 1.0
    reference_levels: tuple = (0.5, -0.5)
    reference_period: int = 800
    # solver
    momentum: str | float = "tuned"
    s_max: int | None = 8
    lipschitz: str | float = "hessian"
    u_max: float = 1.0
    # monitor
    q_init: int = 2
    delta: int = 10
    q_max: int = 100
    adaptive: bool = True
    # run
    duration: int = 4000
    x0: tuple = (0.0, 0.0, 0.0)
    p0: float = 0.0
    warm_start: bool = True

    def __post_init__(self):
        for name in ("reference_levels", "x0", "disturbance"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if self.horizon < 2:
            raise ValueError(f"horizon must be >= 2, got {self.horizon}")
        if not 2 <= self.q_init <= self.horizon:
            raise ValueError(f"q_init must lie in [2, N={self.horizon}], got {self.q_init}")
        if self.adaptive and not 2 <= self.q_max <= self.horizon:
            raise ValueError(f"q_max must lie in [2, N={self.horizon}], got {self.q_max}")
        if self.adaptive and self.q_init > self.q_max:
            raise ValueError(f"q_init={self.q_init} exceeds q_max={self.q_max}")
        if self.duration < self.q_init:
            raise ValueError("duration shorter than one updating interval")
        if not self.reference_levels:
            raise ValueError("reference_levels must not be empty")
        if not self.u_max > 0:
            raise ValueError("u_max must be positive")
        if abs(self.p0) > self.u_max:
            raise ValueError("p0 outside the input bounds")

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class ExtendedState:
    """Plant state, current parameter, current budget and current period."""

    x: np.ndarray
    p: ControlParameter
    q: int
    t: int


def warm_start_shift(p: ControlParameter, q_applied: int, n_u: int = 1) -> ControlParameter:
    """Drop the first q_applied samples and repeat the last one to refill."""
    u = np.asarray(p.values).reshape(-1, n_u)
    N = u.shape[0]
    if not 1 <= q_applied <= N:
        raise ValueError(f"q_applied must lie in [1, {N}], got {q_applied}")
    shifted = np.concatenate([u[q_applied:], np.repeat(u[-1:], q_applied, axis=0)])
    return p.with_values(shifted.ravel())


class ClosedLoop:
    """Engine for one scenario. ``run()`` returns a :class:`Trace`."""

    def __init__(self, config: ScenarioConfig):
        self.config = cfg = config
        self.plant = discretize_triple_integrator(cfg.tau_c)
        if len(cfg.x0) != self.plant.n:
            raise ValueError(f"x0 must have {self.plant.n} entries")
        self.reference = ReferenceSignal.alternating(
            cfg.reference_levels, cfg.reference_period, cfg.duration + cfg.horizon + 1)
        self.cost = CondensedCost(self.plant, cfg.horizon, cfg.Q, cfg.R, self.reference, cfg.J_floor)
        lam_min, lam_max = self.cost.hessian_extremes()
        L = lam_max if cfg.lipschitz == "hessian" else float(cfg.lipschitz)
        c = momentum_constant(lam_min, lam_max) if cfg.momentum == "tuned" else float(cfg.momentum)
        self.solver = SolverConfig(L=L, c=c, s_max=cfg.s_max)
        if cfg.disturbance:
            self.disturbance = DisturbanceSequence.constant(
                cfg.disturbance, cfg.disturbance_start, cfg.disturbance_stop)
        else:
            self.disturbance = DisturbanceSequence.zero(self.plant.n)
        self.monitor = MonitorState(q=cfg.q_init, delta=cfg.delta, q_max=cfg.q_max,
                                    horizon=cfg.horizon)

    def initial_state(self) -> ExtendedState:
        cfg = self.config
        p = ControlParameter.box(self.cost.size, cfg.u_max, cfg.p0)
        return ExtendedState(np.array(cfg.x0, dtype=float), p, cfg.q_init, 0)

    def solver_instance(self, state: ExtendedState):
        """(p_plus, x_hat, k0): the problem the solver works on during this interval."""
        p_plus = warm_start_shift(state.p, state.q, self.plant.n_u) if self.config.warm_start else state.p
        x_hat = rollout(self.plant, state.x, state.p, state.q)[-1]
        return p_plus, x_hat, state.t + state.q

    def step(self, state: ExtendedState):
        """One updating interval. Returns (next state, record, applied controls, states)."""
        q, t, x, p = state.q, state.t, state.x, state.p
        n_u = self.plant.n_u
        p_plus, x_hat, k1 = self.solver_instance(state)
        p_new, it_log = fast_gradient(self.cost, x_hat, k1, p_plus, q, self.solver)
        w = self.disturbance.window(t, q, self.plant.n)
        xs = rollout(self.plant, x, p, q, w)
        x_new = xs[-1]

        J_k = self.cost.eval(p.values, x, t)
        J_plus, J_hat = it_log.costs[0], it_log.costs[-1]
        J_next = self.cost.eval(p_new.values, x_new, k1)

        mon = self.monitor
        mon.q = q
        mon.observe(J_k, J_plus, J_hat, J_next, it_log)
        q_rule = update_q(mon)
        q_next = q_rule if self.config.adaptive else q

        record = IntervalRecord(
            t=t, q=q, q_next=q_next, J=J_k, J_plus=J_plus, J_hat=J_hat, J_next=J_next,
            E=mon.E, D=mon.D, K=mon.K, prediction_ratio=mon.prediction_ratio,
            shift_ratio=mon.shift_ratio, alpha_D=mon.alpha_D, dE_dq=mon.dE_dq,
            dK_dq=mon.dK_dq, Gamma=mon.Gamma, branch=mon.branch,
            restarts=len(it_log.restart_indices))
        controls = np.asarray(p.values).reshape(-1, n_u)[:q]
        return ExtendedState(x_new, p_new, q_next, t + q), record, controls, xs[1:]

    def run(self) -> Trace:
        cfg = self.config
        state = self.initial_state()
        us, xs, qs, records = [], [], [], []

        def build():
            n, n_u = self.plant.n, self.plant.n_u
            u = np.concatenate(us) if us else np.zeros((0, n_u))
            x = np.concatenate(xs) if xs else np.zeros((0, n))
            q = np.concatenate(qs) if qs else np.zeros(0, dtype=int)
            T = x.shape[0]
            y_ref = np.array([self.reference.at(k) for k in range(1, T + 1)]).reshape(T, self.plant.n_y)
            return Trace(np.array(cfg.x0), x, u, y_ref, q, np.array(self.plant.C),
                         records, self.metadata())

        try:
            while cfg.duration - state.t >= state.q:
                q = state.q
                state, rec, u, x = self.step(state)
                records.append(rec)
                us.append(u)
                xs.append(x)
                qs.append(np.full(q, q))
                log.debug("t=%d q=%d K=%.6g branch=%s -> q=%d", rec.t, q, rec.K, rec.branch, rec.q_next)
            rest = cfg.duration - state.t
            if rest > 0:
                w = self.disturbance.window(state.t, rest, self.plant.n)
                xs.append(rollout(self.plant, state.x, state.p, rest, w)[1:])
                us.append(np.asarray(state.p.values).reshape(-1, self.plant.n_u)[:rest])
                qs.append(np.full(rest, state.q))
        except Exception as exc:
            raise ScenarioAborted(f"run failed at period {state.t}: {exc}", build()) from exc
        return build()

    def metadata(self) -> dict:
        return {
            "version": __version__,
            "config": self.config.as_dict(),
            "derived": {"L": self.solver.L, "c": self.solver.c,
                        "lambda_min": self.cost.hessian_extremes()[0],
                        "lambda_max": self.cost.hessian_extremes()[1]},
        }


def run_scenario(config: ScenarioConfig) -> Trace:
    return ClosedLoop(config).run()

"""Projected fast-gradient iterations with a constant restart period."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cost import ControlParameter
from .errors import ConvergenceError, NonFiniteError

NO_RESTART = None


@dataclass(frozen=True)
class SolverConfig:
    """Step 1/L, momentum c and restart period ``s_max`` (None: never restart)."""

    L: float
    c: float = 0.0
    s_max: int | None = NO_RESTART

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if not 0.0 <= self.c < 1.0:
            raise ValueError(f"c must lie in [0, 1), got {self.c}")
        s = self.s_max
        if s is not None and math.isinf(s):
            object.__setattr__(self, "s_max", None)
        elif s is not None:
            if s < 1 or int(s) != s:
                raise ValueError(f"s_max must be a positive integer or None, got {s}")
            object.__setattr__(self, "s_max", int(s))


@dataclass
class IterationLog:
    """Costs J(p(0)), ..., J(p(q)) and the iterations at which restart fired."""

    costs: list = field(default_factory=list)
    restart_indices: list = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.costs) - 1


def project_box(v, lower, upper) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    lower = np.broadcast_to(np.asarray(lower, dtype=float), v.shape)
    upper = np.broadcast_to(np.asarray(upper, dtype=float), v.shape)
    if np.any(lower > upper):
        raise ValueError("lower bound exceeds upper bound")
    return np.minimum(np.maximum(v, lower), upper)


def _iterates(cost, x, k0, p0: ControlParameter, config: SolverConfig):
    """Yield (i, p(i), restarted) forever, starting from a feasible p0."""
    lo, hi = p0.lower, p0.upper
    step = 1.0 / config.L
    c, s_max = config.c, config.s_max
    p_prev = np.array(p0.values)
    r = p_prev
    s = 0
    i = 0
    while True:
        i += 1
        s += 1
        p = project_box(r - step * cost.grad(r, x, k0), lo, hi)
        r = p + c * (p - p_prev)
        restarted = s_max is not None and s == s_max
        if restarted:
            r = p
            s = 0
        p_prev = p
        yield i, p, restarted


def _feasible(p0) -> ControlParameter:
    if not isinstance(p0, ControlParameter):
        raise TypeError("p0 must be a ControlParameter")
    return p0 if p0.is_feasible() else p0.projected()


def fast_gradient(cost, x, k0: int, p0: ControlParameter, q: int,
                  config: SolverConfig) -> tuple[ControlParameter, IterationLog]:
    """Run exactly q projected fast-gradient iterations from p0.

    ``cost`` needs ``eval(p, x, k0)`` and ``grad(p, x, k0)``. With ``c = 0`` this
    is plain projected gradient; with ``s_max=None`` the momentum is never reset.
    """
    if q < 1:
        raise ValueError(f"iteration count must be >= 1, got {q}")
    p0 = _feasible(p0)
    log = IterationLog([cost.eval(p0.values, x, k0)])
    p = p0.values
    for i, p, restarted in _iterates(cost, x, k0, p0, config):
        log.costs.append(cost.eval(p, x, k0))
        if restarted:
            log.restart_indices.append(i)
        if i == q:
            break
    return p0.with_values(p), log


def fixed_point_residual(cost, x, k0, p: ControlParameter, L: float) -> float:
    """Sup-norm of p - P(p - grad/L)."""
    v = p.values
    return float(np.max(np.abs(v - project_box(v - cost.grad(v, x, k0) / L, p.lower, p.upper))))


def solve_to_tolerance(cost, x, k0: int, p0: ControlParameter, config: SolverConfig,
                       tol: float = 1e-9, max_iter: int = 100_000) -> ControlParameter:
    """First iterate whose fixed-point residual is at most ``tol``."""
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    p0 = _feasible(p0)
    best, best_res = p0, fixed_point_residual(cost, x, k0, p0, config.L)
    if best_res <= tol:
        return p0
    for i, p, _ in _iterates(cost, x, k0, p0, config):
        cand = p0.with_values(p)
        res = fixed_point_residual(cost, x, k0, cand, config.L)
        if not math.isfinite(res):
            raise NonFiniteError("fixed-point residual is not finite")
        if res < best_res:
            best, best_res = cand, res
        if res <= tol:
            return cand
        if i >= max_iter:
            raise ConvergenceError(
                f"residual {best_res:.3e} > {tol:.1e} after {max_iter} iterations",
                best, best_res)

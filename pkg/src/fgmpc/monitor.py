"""On-line adaptation of the iteration budget q.

After each updating interval four costs are known:

* ``J_k``        cost of the applied parameter at the measured state, interval start
* ``J_k_plus``   cost of the warm-started parameter at the predicted next state
* ``J_hat_next`` cost after the q solver iterations, same predicted state
* ``J_next``     cost of the new parameter at the measured next state

From these the efficiency ratio ``E = J_hat_next / J_k_plus``, the
mismatch/shift factor ``D = J_next J_k_plus / (J_hat_next J_k)`` and the
contraction ``K = E D = J_next / J_k`` follow. Their sensitivities to q drive a
signed step of size ``delta`` on q, clamped to ``[2, min(q_max, N)]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvariantViolation, NearUnityContraction

Q_MIN = 2
NEAR_UNITY = 1e-9


def _positive(**costs):
    for name, val in costs.items():
        if not val > 0:
            raise InvariantViolation(f"{name} must be positive, got {val}")


def estimate_E(J_hat_next: float, J_k_plus: float) -> float:
    _positive(J_hat_next=J_hat_next, J_k_plus=J_k_plus)
    return J_hat_next / J_k_plus


def estimate_dE_dq(costs) -> float:
    """Last-iteration cost change relative to the starting cost.

    Accepts an :class:`~fgmpc.solver.IterationLog` or a plain sequence of costs.
    """
    costs = getattr(costs, "costs", costs)
    if len(costs) < 3:
        raise ValueError(f"need at least 3 logged costs (q >= 2), got {len(costs)}")
    _positive(J0=costs[0])
    return (costs[-1] - costs[-2]) / costs[0]


def estimate_alpha_D(J_next, J_hat_next, J_k_plus, J_k, q: int) -> float:
    """Slope of the linear model D(q) = 1 + alpha q through the measured D."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    _positive(J_next=J_next, J_hat_next=J_hat_next, J_k_plus=J_k_plus, J_k=J_k)
    return ((J_next * J_k_plus) / (J_hat_next * J_k) - 1.0) / q


def estimate_dK_dq(E: float, D: float, dE_dq: float, alpha_D: float) -> float:
    return E * alpha_D + D * dE_dq


def settling_sensitivity(q: int, K: float, dK_dq: float, eps: float = NEAR_UNITY) -> float:
    """Finite-difference slope of the settling proxy q / |log K| for 0 < K < 1."""
    if not 0.0 < K < 1.0:
        raise ValueError(f"settling sensitivity needs 0 < K < 1, got {K}")
    lk = math.log(K)
    if abs(lk) < eps:
        raise NearUnityContraction(f"|log K| = {abs(lk):.3e} below {eps:.1e}")
    return (-lk + (q / K) * dK_dq) / (lk * lk)


def ideal_feedback(q: int, K: float) -> float:
    """Objective minimised by the ideal budget choice, for offline sweeps:
    the settling proxy q/|log K| when K < 1, otherwise K itself."""
    if not K > 0:
        raise InvariantViolation(f"K must be positive, got {K}")
    if K < 1.0:
        return q / abs(math.log(K))
    return K


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


@dataclass
class MonitorState:
    """Budget q plus everything measured over the interval that just ended."""

    q: int
    delta: int = 10
    q_max: int = 100
    horizon: int | None = None
    eps: float = NEAR_UNITY

    J_k: float | None = None
    J_k_plus: float | None = None
    J_hat_next: float | None = None
    J_next: float | None = None
    E: float | None = None
    D: float | None = None
    K: float | None = None
    prediction_ratio: float | None = None
    shift_ratio: float | None = None
    alpha_D: float | None = None
    dE_dq: float | None = None
    dK_dq: float | None = None
    Gamma: float | None = None
    branch: str | None = None

    def __post_init__(self):
        if self.q_max < Q_MIN:
            raise ValueError(f"q_max must be >= {Q_MIN}, got {self.q_max}")
        if self.delta < 0 or int(self.delta) != self.delta:
            raise ValueError(f"delta must be a non-negative integer, got {self.delta}")
        if self.horizon is not None and self.horizon < Q_MIN:
            raise ValueError(f"horizon must be >= {Q_MIN}, got {self.horizon}")

    @property
    def q_upper(self) -> int:
        return self.q_max if self.horizon is None else min(self.q_max, self.horizon)

    def observe(self, J_k, J_k_plus, J_hat_next, J_next, costs) -> None:
        """Fill every estimate from one completed interval of q iterations."""
        _positive(J_k=J_k, J_k_plus=J_k_plus, J_hat_next=J_hat_next, J_next=J_next)
        self.J_k, self.J_k_plus = J_k, J_k_plus
        self.J_hat_next, self.J_next = J_hat_next, J_next
        self.E = estimate_E(J_hat_next, J_k_plus)
        self.prediction_ratio = J_next / J_hat_next
        self.shift_ratio = J_k_plus / J_k
        self.D = (J_next * J_k_plus) / (J_hat_next * J_k)
        self.K = self.E * self.D
        self.alpha_D = estimate_alpha_D(J_next, J_hat_next, J_k_plus, J_k, self.q)
        self.dE_dq = estimate_dE_dq(costs)
        self.dK_dq = estimate_dK_dq(self.E, self.D, self.dE_dq, self.alpha_D)
        self.Gamma = None
        self.branch = None


def update_q(state: MonitorState) -> int:
    """Next budget: q - delta * sign(Gamma), clamped to [2, min(q_max, N)].

    Gamma is dK/dq while K >= 1 and the settling-proxy slope otherwise; a
    near-unity K on the contraction side holds q. Records Gamma and the branch
    on ``state``.
    """
    if state.K is None or state.dK_dq is None:
        raise ValueError("monitor state has no completed interval to act on")
    if state.K >= 1.0:
        gamma, branch = state.dK_dq, "contraction"
    else:
        try:
            gamma, branch = settling_sensitivity(state.q, state.K, state.dK_dq, state.eps), "settling"
        except NearUnityContraction:
            gamma, branch = 0.0, "hold"
    state.Gamma, state.branch = gamma, branch
    q_new = state.q - state.delta * _sign(gamma)
    return max(Q_MIN, min(state.q_upper, q_new))

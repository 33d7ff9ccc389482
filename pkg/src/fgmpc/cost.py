"""Condensed quadratic tracking cost for the stacked control sequence.

With the horizon-N prediction written as ``Y = F x + G p`` the cost is

    J(p, x) = J_floor + (Y - Y_ref)' Qbar (Y - Y_ref) + p' Rbar p

so that ``grad J = H p + g(x)`` with ``H = 2 (G' Qbar G + Rbar)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg

from .errors import NonFiniteError
from .plant import LinearPlant


@dataclass(frozen=True)
class ReferenceSignal:
    """Piecewise-constant setpoint schedule indexed by basic period.

    ``values[i]`` holds from period ``times[i]`` until the next switch; the
    last value is held forever.
    """

    times: tuple
    values: tuple

    def __post_init__(self):
        times = tuple(int(t) for t in self.times)
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if values.ndim == 1:
            values = values[:, None]
        if not times or times[0] != 0:
            raise ValueError("reference schedule must start at period 0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("reference switch times must be strictly increasing")
        if len(times) != values.shape[0]:
            raise ValueError("need one setpoint per switch time")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", tuple(map(tuple, values)))
        arr = values.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "_array", arr)
        object.__setattr__(self, "_times", np.asarray(times))

    @classmethod
    def constant(cls, value) -> "ReferenceSignal":
        return cls((0,), (value,))

    @classmethod
    def alternating(cls, levels, period: int, until: int) -> "ReferenceSignal":
        """Cycle through ``levels``, switching every ``period`` periods up to ``until``."""
        if period < 1:
            raise ValueError(f"period must be >= 1, got {period}")
        times = list(range(0, max(until, 1), period))
        vals = [levels[i % len(levels)] for i in range(len(times))]
        return cls(tuple(times), tuple(vals))

    @property
    def n_y(self) -> int:
        return self._array.shape[1]

    def at(self, k: int) -> np.ndarray:
        i = int(np.searchsorted(self._times, k, side="right")) - 1
        return self._array[max(i, 0)]

    def window(self, k0: int, N: int) -> np.ndarray:
        """Setpoints for periods k0+1 .. k0+N, shape (N, n_y)."""
        k = np.arange(k0 + 1, k0 + N + 1)
        idx = np.searchsorted(self._times, k, side="right") - 1
        return self._array[np.maximum(idx, 0)]


@dataclass(frozen=True)
class ControlParameter:
    """Stacked control samples (u(1), ..., u(N)) with an element-wise box."""

    values: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        lo = np.broadcast_to(np.asarray(self.lower, dtype=float), v.shape).copy()
        hi = np.broadcast_to(np.asarray(self.upper, dtype=float), v.shape).copy()
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        for name, arr in (("values", v), ("lower", lo), ("upper", hi)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def box(cls, size: int, bound: float, fill: float = 0.0) -> "ControlParameter":
        return cls(np.full(size, float(fill)), -bound, bound)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return self.values.size

    def with_values(self, values) -> "ControlParameter":
        return ControlParameter(values, self.lower, self.upper)

    def projected(self) -> "ControlParameter":
        return self.with_values(np.clip(self.values, self.lower, self.upper))

    def is_feasible(self) -> bool:
        return bool(np.all(self.values >= self.lower) and np.all(self.values <= self.upper))


def _weight(W, size: int, name: str) -> np.ndarray:
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if W.shape == (1, 1) and size != 1:
        W = W[0, 0] * np.eye(size)
    if W.shape != (size, size):
        raise ValueError(f"{name} must be scalar or {size}x{size}, got {W.shape}")
    if not np.allclose(W, W.T):
        raise ValueError(f"{name} must be symmetric")
    return W


@dataclass(frozen=True)
class CondensedCost:
    """Quadratic output-tracking cost over an N-step horizon.

    The reference is sampled at absolute periods k0+1 .. k0+N, where k0 is the
    period the prediction starts from.
    """

    plant: LinearPlant
    horizon: int
    Q: np.ndarray
    R: np.ndarray
    reference: ReferenceSignal
    J_floor: float = 1.0
    _ops: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if not self.J_floor > 0:
            raise ValueError(f"J_floor must be positive, got {self.J_floor}")
        plant = self.plant
        Q = _weight(self.Q, plant.n_y, "Q")
        R = _weight(self.R, plant.n_u, "R")
        if np.linalg.eigvalsh(Q)[0] < 0:
            raise ValueError("Q must be positive semidefinite")
        if np.linalg.eigvalsh(R)[0] <= 0:
            raise ValueError("R must be positive definite")
        if self.reference.n_y != plant.n_y:
            raise ValueError("reference dimension does not match plant output")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)

        N, n, n_u, n_y = self.horizon, plant.n, plant.n_u, plant.n_y
        F = np.empty((N * n_y, n))
        markov = np.empty((N, n_y, n_u))   # C A^i B
        M = np.eye(n)
        AiB = plant.B.copy()
        for i in range(N):
            M = plant.A @ M
            F[i * n_y:(i + 1) * n_y] = plant.C @ M
            markov[i] = plant.C @ AiB
            AiB = plant.A @ AiB
        G = np.zeros((N * n_y, N * n_u))
        for k in range(N):
            for j in range(k + 1):
                G[k * n_y:(k + 1) * n_y, j * n_u:(j + 1) * n_u] = markov[k - j]
        Qbar = np.kron(np.eye(N), Q)
        Rbar = np.kron(np.eye(N), R)
        H = 2.0 * (G.T @ Qbar @ G + Rbar)
        H = 0.5 * (H + H.T)
        ops = {"F": F, "G": G, "Qbar": Qbar, "Rbar": Rbar, "H": H,
               "GtQ2": 2.0 * G.T @ Qbar}
        for arr in ops.values():
            arr.setflags(write=False)
        object.__setattr__(self, "_ops", ops)

    @property
    def size(self) -> int:
        return self.horizon * self.plant.n_u

    @property
    def F(self) -> np.ndarray:
        return self._ops["F"]

    @property
    def G(self) -> np.ndarray:
        return self._ops["G"]

    @property
    def hessian(self) -> np.ndarray:
        return self._ops["H"]

    def _offset(self, x, k0: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.plant.n,):
            raise ValueError(f"state must have shape ({self.plant.n},), got {x.shape}")
        return self.F @ x - self.reference.window(k0, self.horizon).ravel()

    def _check_p(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.size,):
            raise ValueError(f"control parameter must have length {self.size}, got {p.shape}")
        return p

    def linear_term(self, x, k0: int) -> np.ndarray:
        """g(x, k0) in grad J = H p + g."""
        return self._ops["GtQ2"] @ self._offset(x, k0)

    def eval(self, p, x, k0: int = 0) -> float:
        p = self._check_p(p)
        with np.errstate(over="ignore", invalid="ignore"):
            e = self.G @ p + self._offset(x, k0)
            val = self.J_floor + e @ (self._ops["Qbar"] @ e) + p @ (self._ops["Rbar"] @ p)
        if not math.isfinite(val):
            raise NonFiniteError(f"cost evaluated to {val}")
        return float(val)

    def grad(self, p, x, k0: int = 0) -> np.ndarray:
        p = self._check_p(p)
        with np.errstate(over="ignore", invalid="ignore"):
            g = self.hessian @ p + self.linear_term(x, k0)
        if not np.all(np.isfinite(g)):
            raise NonFiniteError("gradient has non-finite entries")
        return g

    def unconstrained_minimizer(self, x, k0: int = 0) -> np.ndarray:
        return -linalg.cho_solve(self._cholesky, self.linear_term(x, k0))

    @cached_property
    def _cholesky(self):
        return linalg.cho_factor(self.hessian)

    @cached_property
    def _extremes(self) -> tuple[float, float]:
        # The lower end of the spectrum is tightly clustered near 2R, which stalls
        # power-type iterations; a dense symmetric solve is cheap at these sizes.
        n = self.size
        lam_min = linalg.eigvalsh(self.hessian, subset_by_index=[0, 0])[0]
        lam_max = linalg.eigvalsh(self.hessian, subset_by_index=[n - 1, n - 1])[0]
        return float(lam_min), float(lam_max)

    def hessian_extremes(self) -> tuple[float, float]:
        """(lambda_min, lambda_max) of H."""
        return self._extremes

    def lipschitz_bound(self) -> float:
        return self._extremes[1]


def power_iteration(matvec, n: int, tol: float = 1e-10, max_iter: int = 10_000,
                    seed: int = 0) -> float:
    """Dominant eigenvalue of a symmetric positive definite operator.

    Stops when the Rayleigh quotient changes by less than ``tol`` relative.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = matvec(v)
        lam_new = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(lam_new - lam) <= tol * abs(lam_new):
            return lam_new
        lam = lam_new
    return lam


def momentum_constant(lambda_min: float, lambda_max: float) -> float:
    """(sqrt(lmax) - sqrt(lmin)) / (sqrt(lmax) + sqrt(lmin))."""
    if not (lambda_min > 0 and lambda_max > 0):
        raise ValueError("eigenvalues must be positive")
    if lambda_min > lambda_max:
        raise ValueError("lambda_min exceeds lambda_max")
    a, b = math.sqrt(lambda_max), math.sqrt(lambda_min)
    return (a - b) / (a + b)

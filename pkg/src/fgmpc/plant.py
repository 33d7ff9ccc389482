"""Discrete-time linear plant: triple-integrator discretization, nominal
prediction and disturbed ("real") simulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinearPlant:
    """x(k+1) = A x(k) + B u(k),  y(k) = C x(k), sampled every ``tau_c`` seconds."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    tau_c: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise ValueError(f"B must have {A.shape[0]} rows, got {B.shape}")
        if C.shape[1] != A.shape[0]:
            raise ValueError(f"C must have {A.shape[0]} columns, got {C.shape}")
        if not self.tau_c > 0:
            raise ValueError(f"tau_c must be positive, got {self.tau_c}")
        for name, arr in (("A", A), ("B", B), ("C", C)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "tau_c", float(self.tau_c))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def n_u(self) -> int:
        return self.B.shape[1]

    @property
    def n_y(self) -> int:
        return self.C.shape[0]


def discretize_triple_integrator(tau_c: float) -> LinearPlant:
    """Exact zero-order-hold model of x1' = x2, x2' = x3, x3' = u with y = x1."""
    if not tau_c > 0:
        raise ValueError(f"sampling period must be positive, got {tau_c}")
    t = float(tau_c)
    A = np.array([[1.0, t, t * t / 2.0],
                  [0.0, 1.0, t],
                  [0.0, 0.0, 1.0]])
    B = np.array([[t ** 3 / 6.0], [t * t / 2.0], [t]])
    C = np.array([[1.0, 0.0, 0.0]])
    return LinearPlant(A, B, C, t)


@dataclass(frozen=True)
class DisturbanceSequence:
    """Additive state disturbance w(k), k = 1, 2, ...

    ``values[k - 1]`` is added to the state on the step that ends at absolute
    period k. Periods past the end of ``values`` get zero.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zero(cls, n: int) -> "DisturbanceSequence":
        return cls(np.zeros((0, n)))

    @classmethod
    def constant(cls, w, start: int, stop: int) -> "DisturbanceSequence":
        """Constant ``w`` on periods start+1 .. stop, zero elsewhere."""
        w = np.asarray(w, dtype=float)
        if not 0 <= start <= stop:
            raise ValueError(f"need 0 <= start <= stop, got {start}, {stop}")
        vals = np.zeros((stop, w.size))
        vals[start:stop] = w
        return cls(vals)

    def window(self, start: int, j: int, n: int) -> np.ndarray:
        """Rows w(start+1) .. w(start+j) as a (j, n) array."""
        out = np.zeros((j, n))
        avail = self.values[start:start + j]
        if avail.size:
            if avail.shape[1] != n:
                raise ValueError(f"disturbance has width {avail.shape[1]}, state has {n}")
            out[:avail.shape[0]] = avail
        return out


def _controls(plant: LinearPlant, p, j: int) -> np.ndarray:
    u = np.asarray(p, dtype=float).reshape(-1, plant.n_u)
    if not 1 <= j <= u.shape[0]:
        raise ValueError(f"step count {j} outside 1..{u.shape[0]}")
    return u


def rollout(plant: LinearPlant, x, p, j: int, w: np.ndarray | None = None) -> np.ndarray:
    """All states x(0) .. x(j) under the first j control samples of p.

    ``w`` is an optional (j, n) array of additive disturbances.
    """
    u = _controls(plant, p, j)
    xs = np.empty((j + 1, plant.n))
    xs[0] = np.asarray(x, dtype=float)
    A, B = plant.A, plant.B
    for i in range(j):
        xs[i + 1] = A @ xs[i] + B @ u[i]
        if w is not None:
            xs[i + 1] += w[i]
    return xs


def predict(plant: LinearPlant, x, p, j: int) -> np.ndarray:
    """Nominal model state after j steps from x under the sequence encoded by p."""
    return rollout(plant, x, p, j)[-1]


def simulate_real(plant: LinearPlant, x, p, j: int,
                  w: DisturbanceSequence | None = None, start: int = 0) -> np.ndarray:
    """Like :func:`predict` but adds w(start+1) .. w(start+j) along the way."""
    if w is None:
        return predict(plant, x, p, j)
    return rollout(plant, x, p, j, w.window(start, j, plant.n))[-1]

"""Closed-loop traces and their on-disk form.

A trace is written as three files sharing a stem::

    <stem>.signals.csv    one row per basic period
    <stem>.intervals.csv  one row per updating interval
    <stem>.meta.json      resolved configuration and run metadata

Floats are written with ``repr`` so that reading them back is exact.
"""

from __future__ import annotations

import csv
import json
from dataclasses import astuple, dataclass, field, fields
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class IntervalRecord:
    t: int
    q: int
    q_next: int
    J: float
    J_plus: float
    J_hat: float
    J_next: float
    E: float
    D: float
    K: float
    prediction_ratio: float
    shift_ratio: float
    alpha_D: float
    dE_dq: float
    dK_dq: float
    Gamma: float
    branch: str
    restarts: int


INTERVAL_COLUMNS = tuple(f.name for f in fields(IntervalRecord))
_INT_FIELDS = {"t", "q", "q_next", "restarts"}


@dataclass
class Trace:
    """Per-period signals plus per-interval monitor data.

    Row i of the signal arrays describes basic period t = i + 1: ``u`` is the
    control held during that period and ``x`` the state at its end.
    """

    x0: np.ndarray
    x: np.ndarray
    u: np.ndarray
    y_ref: np.ndarray
    q: np.ndarray
    C: np.ndarray
    records: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def duration(self) -> int:
        return self.x.shape[0]

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, self.duration + 1)

    @property
    def y(self) -> np.ndarray:
        return self.x @ self.C.T

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def tracking_cost(self, Q) -> float:
        """Sum over periods of (y - y_ref)' Q (y - y_ref)."""
        e = self.y - self.y_ref
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        if Q.shape == (1, 1):
            return float(Q[0, 0] * np.sum(e * e))
        return float(np.einsum("ti,ij,tj->", e, Q, e))

    def mean_q(self, start: int = 0) -> float:
        """Time average of the budget signal over periods start+1 .. duration."""
        return float(np.mean(self.q[start:]))

    def signal_columns(self) -> list[str]:
        n, n_u, n_y = self.x.shape[1], self.u.shape[1], self.y_ref.shape[1]
        cols = ["t"] + [f"x{i + 1}" for i in range(n)]
        cols += ["u"] if n_u == 1 else [f"u{i + 1}" for i in range(n_u)]
        cols += (["y", "y_ref"] if n_y == 1 else
                 [f"y{i + 1}" for i in range(n_y)] + [f"y_ref{i + 1}" for i in range(n_y)])
        return cols + ["q"]


def _fmt(v) -> str:
    if isinstance(v, (str, int, np.integer)):
        return str(v)
    return repr(float(v))


def _paths(stem) -> tuple[Path, Path, Path]:
    stem = Path(stem)
    return (stem.with_name(stem.name + ".signals.csv"),
            stem.with_name(stem.name + ".intervals.csv"),
            stem.with_name(stem.name + ".meta.json"))


def write_trace(trace: Trace, stem) -> list[Path]:
    """Write the three trace files next to ``stem`` and return their paths."""
    sig_path, int_path, meta_path = _paths(stem)
    meta = dict(trace.metadata)
    meta["x0"] = [float(v) for v in trace.x0]
    meta["C"] = np.asarray(trace.C).tolist()
    try:
        sig_path.parent.mkdir(parents=True, exist_ok=True)
        with open(sig_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(trace.signal_columns())
            y = trace.y
            for i in range(trace.duration):
                w.writerow([str(i + 1)]
                           + [_fmt(v) for v in trace.x[i]]
                           + [_fmt(v) for v in trace.u[i]]
                           + [_fmt(v) for v in y[i]]
                           + [_fmt(v) for v in trace.y_ref[i]]
                           + [str(int(trace.q[i]))])
        with open(int_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(INTERVAL_COLUMNS)
            for r in trace.records:
                w.writerow([_fmt(v) for v in astuple(r)])
        with open(meta_path, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write trace to {exc.filename or stem}: {exc.strerror}") from exc
    return [sig_path, int_path, meta_path]


def read_trace(stem) -> Trace:
    sig_path, int_path, meta_path = _paths(stem)
    with open(meta_path) as fh:
        meta = json.load(fh)
    x0 = np.asarray(meta.pop("x0"), dtype=float)
    C = np.atleast_2d(np.asarray(meta.pop("C"), dtype=float))
    n, n_y = x0.size, C.shape[0]
    with open(sig_path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    n_u = len(header) - 1 - n - 2 * n_y - 1
    data = np.array([[float(v) for v in row] for row in body]).reshape(len(body), len(header))
    x = data[:, 1:1 + n]
    u = data[:, 1 + n:1 + n + n_u]
    y_ref = data[:, 1 + n + n_u + n_y:1 + n + n_u + 2 * n_y]
    q = data[:, -1].astype(int)
    with open(int_path, newline="") as fh:
        reader = csv.DictReader(fh)
        records = [IntervalRecord(**{k: (v if k == "branch" else int(v) if k in _INT_FIELDS else float(v))
                                     for k, v in row.items()}) for row in reader]
    return Trace(x0, x, u, y_ref, q, C, records, meta)

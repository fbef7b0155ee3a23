"""Uniformly sampled trajectories, CSV persistence and snapshot matrices."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, GridError, IoError, SchemaError, SizeError

GRID_RTOL = 1e-9


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """State (and optional input) samples on a uniform time grid.

    ``states`` is ``n x (m+1)`` and ``inputs`` is ``q x (m+1)``: one row per
    channel, one column per sample.
    """

    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray | None = None
    state_names: tuple = field(default=())
    input_names: tuple = field(default=())

    def __post_init__(self):
        times = _frozen(np.ravel(self.times))
        states = _frozen(np.atleast_2d(self.states))
        inputs = None if self.inputs is None else _frozen(np.atleast_2d(self.inputs))
        if times.size < 2:
            raise SizeError("a time series needs at least 2 samples")
        if states.shape[1] != times.size:
            raise DataError(
                f"states have {states.shape[1]} columns but there are {times.size} times"
            )
        if inputs is not None and inputs.shape[1] != times.size:
            raise DataError(
                f"inputs have {inputs.shape[1]} columns but there are {times.size} times"
            )
        for name, a in (("times", times), ("states", states), ("inputs", inputs)):
            if a is not None and not np.all(np.isfinite(a)):
                raise DataError(f"{name} contain NaN or Inf")
        _check_grid(times)

        n = states.shape[0]
        q = 0 if inputs is None else inputs.shape[0]
        state_names = tuple(self.state_names) or tuple(f"x{i + 1}" for i in range(n))
        input_names = tuple(self.input_names) or tuple(f"u{i + 1}" for i in range(q))
        if len(state_names) != n or len(input_names) != q:
            raise SchemaError("channel names do not match channel counts")

        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "state_names", state_names)
        object.__setattr__(self, "input_names", input_names)

    @property
    def dt(self):
        return float((self.times[-1] - self.times[0]) / (self.times.size - 1))

    @property
    def n_states(self):
        return self.states.shape[0]

    @property
    def n_inputs(self):
        return 0 if self.inputs is None else self.inputs.shape[0]

    @property
    def n_samples(self):
        return self.times.size

    def __len__(self):
        return self.times.size

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        if (self.inputs is None) != (other.inputs is None):
            return False
        same_inputs = self.inputs is None or np.array_equal(self.inputs, other.inputs)
        return (
            np.array_equal(self.times, other.times)
            and np.array_equal(self.states, other.states)
            and same_inputs
            and self.state_names == other.state_names
            and self.input_names == other.input_names
        )

    __hash__ = None

    def slice(self, start=None, stop=None, step=None):
        """Return the samples ``[start:stop:step]`` as a new series."""
        sl = np.s_[start:stop:step]
        return TimeSeries(
            self.times[sl],
            self.states[:, sl],
            None if self.inputs is None else self.inputs[:, sl],
            self.state_names,
            self.input_names,
        )

    def without_inputs(self):
        return TimeSeries(self.times, self.states, None, self.state_names)

    def with_inputs(self, inputs, input_names=()):
        return TimeSeries(self.times, self.states, inputs, self.state_names, input_names)


def _check_grid(times):
    steps = np.diff(times)
    if np.any(steps <= 0):
        raise GridError("times must be strictly increasing")
    dt = (times[-1] - times[0]) / (times.size - 1)
    dev = np.max(np.abs(steps - dt))
    if dev >= GRID_RTOL * dt:
        raise GridError(f"non-uniform time grid (max step deviation {dev:.3g}, dt={dt:.6g})")


@dataclass(frozen=True, eq=False)
class SnapshotPair:
    """Snapshot matrices ``X`` (current), ``X'`` (shifted) and the aligned inputs."""

    current: np.ndarray
    shifted: np.ndarray
    inputs_current: np.ndarray | None = None

    def __post_init__(self):
        if self.current.shape != self.shifted.shape:
            raise SizeError("current and shifted snapshot matrices differ in shape")

    @property
    def n_snapshots(self):
        return self.current.shape[1]


def to_snapshot_pair(series: TimeSeries) -> SnapshotPair:
    if series.n_samples < 2:
        raise SizeError("need at least 2 samples to form snapshot pairs")
    u = None if series.inputs is None else series.inputs[:, :-1]
    return SnapshotPair(series.states[:, :-1], series.states[:, 1:], u)


def _default_roles(header):
    roles = {}
    for name in header:
        key = name.strip()
        if key in ("t", "time"):
            roles[key] = "time"
        elif key.startswith("u"):
            roles[key] = "input"
        else:
            roles[key] = "state"
    return roles


def load_timeseries(path, schema=None, stride=1) -> TimeSeries:
    """Read a CSV trajectory.

    ``schema`` maps column names to one of ``"time"``, ``"state"``,
    ``"input"``; columns not in the map are ignored. Without a schema the
    header decides: ``t`` is time, ``u*`` columns are inputs and everything
    else is a state. ``stride`` keeps every stride-th row after sorting.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]

    roles = dict(schema) if schema is not None else _default_roles(header)
    for col in roles:
        if col not in header:
            raise SchemaError(f"missing column {col!r} in {path}")
    time_cols = [c for c, r in roles.items() if r == "time"]
    state_cols = [c for c, r in roles.items() if r == "state"]
    input_cols = [c for c, r in roles.items() if r == "input"]
    bad = {r for r in roles.values()} - {"time", "state", "input"}
    if bad:
        raise SchemaError(f"unknown column roles {sorted(bad)}")
    if len(time_cols) != 1:
        raise SchemaError("exactly one time column is required")
    if not state_cols:
        raise SchemaError("at least one state column is required")

    if any(len(r) != len(header) for r in body):
        raise SchemaError(f"{path}: ragged rows or missing cells")
    try:
        data = np.array([[float(v) for v in r] for r in body], dtype=float)
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric cell ({exc})") from exc
    if data.size == 0:
        raise SizeError(f"{path} has no data rows")
    if not np.all(np.isfinite(data)):
        raise DataError(f"{path} contains NaN or Inf")

    idx = {c: header.index(c) for c in header}
    order = np.argsort(data[:, idx[time_cols[0]]], kind="stable")
    data = data[order][:: int(stride)]
    times = data[:, idx[time_cols[0]]]
    states = data[:, [idx[c] for c in state_cols]].T
    inputs = data[:, [idx[c] for c in input_cols]].T if input_cols else None
    return TimeSeries(times, states, inputs, tuple(state_cols), tuple(input_cols))


def save_timeseries(series: TimeSeries, path) -> None:
    """Write ``series`` as CSV: ``t``, then state columns, then input columns.

    Values are written with 17 significant digits so a reload is bit-exact.
    """
    path = Path(path)
    header = ["t", *series.state_names, *series.input_names]
    cols = [series.times[None, :], series.states]
    if series.inputs is not None:
        cols.append(series.inputs)
    table = np.vstack(cols).T
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            np.savetxt(fh, table, fmt="%.17g", delimiter=",")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc

"""Sparse identification of nonlinear dynamics, with and without inputs.

``identify`` regresses state derivatives onto a candidate library built
over the states (and the inputs, when the series carries them).
``identify_feedback`` regresses recorded inputs onto a state-only library to
recover a feedback law ``u = k(x)``. Identified models can be evaluated,
simulated, printed as equations and stored as JSON.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .differentiation import DerivativeEstimate, differentiate
from .errors import DivergenceError, IoError, ParamError, SchemaError, ShapeError
from .library import LibrarySpec, evaluate, point_evaluator, term_name
from .regression import CoefficientMatrix, lasso, row_scales, stlsq
from .systems import InputFunction, Signal, rk4_integrate
from .timeseries import TimeSeries

MODEL_FILE_VERSION = 1
SIMULATION_DIVERGENCE = 1e6


@dataclass(eq=False)
class SparseModel:
    """Identified dynamics ``dx/dt = Xi @ Theta(x, u)``."""

    coefficients: CoefficientMatrix
    library: LibrarySpec
    state_names: tuple = ()
    input_names: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.coefficients, CoefficientMatrix):
            self.coefficients = CoefficientMatrix(self.coefficients, self.library)
        xi = self.coefficients.values
        if xi.shape != (self.library.state_dim, len(self.library.terms)):
            raise ShapeError(
                f"coefficients {xi.shape} do not fit a library with "
                f"{self.library.state_dim} states and {len(self.library.terms)} terms"
            )
        self.state_names = tuple(self.state_names)
        self.input_names = tuple(self.input_names)
        self._compiled = None

    @property
    def state_dim(self):
        return self.library.state_dim

    @property
    def input_dim(self):
        return self.library.input_dim

    @property
    def xi(self):
        return self.coefficients.values

    def channel_names(self):
        return self.library.channel_names(self.state_names or None, self.input_names or None)

    def term_names(self):
        return self.library.names(self.channel_names())

    def coefficient(self, state, term):
        """Coefficient of the named ``term`` in the equation for ``state``
        (both given by name or index)."""
        i = state if isinstance(state, int) else self._state_index(state)
        j = term if isinstance(term, int) else self.term_names().index(term)
        return float(self.xi[i, j])

    def _state_index(self, name):
        names = self.channel_names()[: self.state_dim]
        return names.index(name)

    def rhs(self, x, u=None):
        return model_rhs(self, x, u)

    def __eq__(self, other):
        if not isinstance(other, SparseModel):
            return NotImplemented
        return (self.coefficients == other.coefficients and self.library == other.library
                and self.state_names == other.state_names
                and self.input_names == other.input_names and self.metadata == other.metadata)

    __hash__ = None


@dataclass(eq=False)
class FeedbackLaw:
    """Recovered control law ``u = Xi_u @ Theta(x)``."""

    coefficients: CoefficientMatrix
    library: LibrarySpec
    state_names: tuple = ()

    def __call__(self, x):
        theta = evaluate(self.library, np.asarray(x, dtype=float).reshape(self.library.state_dim, -1))
        out = self.coefficients.values @ theta.values
        return out[:, 0] if np.ndim(x) == 1 else out

    def term_names(self):
        return self.library.names(self.library.channel_names(self.state_names or None))


def _fingerprint(series):
    h = hashlib.sha256(np.ascontiguousarray(series.states).tobytes())
    if series.inputs is not None:
        h.update(np.ascontiguousarray(series.inputs).tobytes())
    return h.hexdigest()[:16]


def _sparse_solve(theta, targets, solver, sparsity, normalize, library):
    if solver == "stlsq":
        return stlsq(theta, targets, sparsity, normalize=normalize, library=library)
    if solver == "lasso":
        xi = np.vstack([lasso(theta, t, sparsity, normalize=normalize) for t in targets])
        return CoefficientMatrix(xi, library)
    raise ParamError(f"unknown solver {solver!r}")


def _resolve_derivatives(series, diff_method, derivatives, diff_params):
    if derivatives is not None:
        d = derivatives.values if isinstance(derivatives, DerivativeEstimate) else derivatives
        d = np.atleast_2d(np.asarray(d, dtype=float))
        if d.shape != series.states.shape:
            raise ShapeError(f"derivatives {d.shape} do not match states {series.states.shape}")
        method = derivatives.method if isinstance(derivatives, DerivativeEstimate) else {"method": "supplied"}
        return d, method
    est = differentiate(series, diff_method, **diff_params)
    return est.values, est.method


def identify(series: TimeSeries, library: LibrarySpec, diff_method="central", solver="stlsq",
             sparsity=0.1, derivatives=None, normalize=True, **diff_params) -> SparseModel:
    """Fit a sparse model ``dx/dt = Xi Theta(x[, u])`` to a trajectory.

    Derivatives come from ``derivatives`` when given (array or
    :class:`DerivativeEstimate` aligned with every sample), otherwise from
    ``differentiate(series, diff_method, **diff_params)``. The first and last
    samples are dropped before the regression. ``sparsity`` is the STLSQ
    threshold or the LASSO weight; with ``normalize`` (the default) it acts on
    coefficients of unit-norm library rows.
    """
    if library.state_dim != series.n_states:
        raise ParamError(f"library has {library.state_dim} states, data has {series.n_states}")
    if library.input_dim != series.n_inputs:
        raise ParamError(f"library has {library.input_dim} inputs, data has {series.n_inputs}")
    dx, method = _resolve_derivatives(series, diff_method, derivatives, diff_params)

    X = series.states[:, 1:-1]
    U = None if series.inputs is None else series.inputs[:, 1:-1]
    target = dx[:, 1:-1]
    theta = evaluate(library, X, U).values
    p, m = theta.shape
    if m < p + 1:
        warnings.warn(f"only {m} samples for {p} library terms", RuntimeWarning, stacklevel=2)

    coef = _sparse_solve(theta, target, solver, sparsity, normalize, library)
    scaled = theta / row_scales(theta)[:, None]
    meta = {
        "solver": solver,
        "alpha_or_threshold": float(sparsity),
        "normalize": bool(normalize),
        "seed": None,
        "derivatives": method,
        "n_samples": int(m),
        "condition_number": float(np.linalg.cond(scaled.T)),
        "fingerprint": _fingerprint(series),
    }
    return SparseModel(coef, library, series.state_names, series.input_names, meta)


def identify_feedback(series: TimeSeries, library: LibrarySpec, solver="stlsq", sparsity=0.5,
                      normalize=False) -> FeedbackLaw:
    """Regress the recorded inputs onto a state-only library.

    Unlike :func:`identify`, the threshold defaults to raw coefficient units:
    a feedback gain is compared directly with ``sparsity``. Scaled
    thresholding keeps tiny spurious gains on large, nearly constant states
    (such as the Lorenz ``z``), and those trade off against the constant term.
    """
    if series.inputs is None:
        raise ParamError("feedback identification needs recorded inputs")
    if library.input_dim != 0:
        raise ParamError("feedback laws use a state-only library")
    if library.state_dim != series.n_states:
        raise ParamError(f"library has {library.state_dim} states, data has {series.n_states}")
    theta = evaluate(library, series.states).values
    coef = _sparse_solve(theta, series.inputs, solver, sparsity, normalize, library)
    return FeedbackLaw(coef, library, series.state_names)


def _compiled(model):
    if model._compiled is None:
        active = np.any(model.xi != 0, axis=0)
        model._compiled = (point_evaluator(model.library, active), model.xi[:, active])
    return model._compiled


def model_rhs(model: SparseModel, x, u=None):
    """Evaluate ``Xi @ Theta(x, u)`` at a single point."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != model.state_dim:
        raise ShapeError(f"model has {model.state_dim} states, got {x.size}")
    u = np.zeros(0) if u is None else np.asarray(u, dtype=float).ravel()
    if u.size != model.input_dim:
        raise ShapeError(f"model has {model.input_dim} inputs, got {u.size}")
    f, xi = _compiled(model)
    if xi.shape[1] == 0:
        return np.zeros(model.state_dim)
    return xi @ f(np.concatenate([x, u]))


def sampled_input(series: TimeSeries, channel=None):
    """Zero-order-hold replay of the inputs recorded in ``series``."""
    if series.inputs is None:
        raise ParamError("series has no inputs")
    t0, dt, last = series.times[0], series.dt, series.n_samples - 1
    chans = range(series.n_inputs) if channel is None else [channel]

    def make(i):
        row = series.inputs[i]
        return InputFunction(
            lambda t: row[min(max(int(np.floor((t - t0) / dt + 1e-6)), 0), last)], True, "replay"
        )

    fns = [make(i) for i in chans]
    return fns if channel is None else fns[0]


def simulate(model: SparseModel, x0, input_fn=None, t_span=1.0, dt=0.01, t0=0.0) -> TimeSeries:
    """Integrate an identified model with RK4.

    ``input_fn`` may be a callable ``t -> q-vector``, a :class:`Signal`, an
    :class:`InputFunction` or a list with one entry per input channel.

    Raises:
        DivergenceError: once ``|x|`` exceeds 1e6; ``.time`` holds the
            blow-up time.
    """
    if not dt > 0:
        raise ParamError("dt must be positive")
    if t_span < dt * (1 - 1e-9):
        raise ParamError("t_span must be at least one step")
    q = model.input_dim
    if q == 0:
        signal = None
    elif input_fn is None:
        raise ParamError("model has inputs; an input function is required")
    elif isinstance(input_fn, (Signal, InputFunction, list, tuple)):
        signal = input_fn
        if isinstance(signal, (list, tuple)) and len(signal) != q:
            raise ShapeError(f"{len(signal)} input functions for {q} model inputs")
    else:
        signal = [lambda t, i=i: np.ravel(input_fn(t))[i] for i in range(q)]

    def rhs(x, u, t):
        return model_rhs(model, x, u if q else None)

    return rk4_integrate(rhs, x0, signal, t_span, dt, t0, divergence=SIMULATION_DIVERGENCE,
                         input_names=model.input_names)


def _fmt(c):
    return f"{c:.12g}"


def model_to_equations(model: SparseModel, channel_names=None) -> str:
    """One ``dxi/dt = ...`` line per state, active terms in library order."""
    names = list(channel_names) if channel_names else model.channel_names()
    lines = []
    for i in range(model.state_dim):
        parts = []
        for term, c in zip(model.library.terms, model.xi[i]):
            if c == 0:
                continue
            label = term_name(term, names)
            body = _fmt(abs(c)) if label == "1" else f"{_fmt(abs(c))}*{label}"
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        lines.append(f"d{names[i]}/dt = " + (" ".join(parts) if parts else "0"))
    return "\n".join(lines)


def model_to_dict(model: SparseModel):
    return {
        "version": MODEL_FILE_VERSION,
        "state_dim": model.state_dim,
        "input_dim": model.input_dim,
        "library": model.library.to_dict(),
        "coefficients": model.xi.tolist(),
        "state_names": list(model.state_names),
        "input_names": list(model.input_names),
        "metadata": model.metadata,
    }


def model_from_dict(d) -> SparseModel:
    if not isinstance(d, dict):
        raise SchemaError("model file must hold a JSON object")
    if d.get("version") != MODEL_FILE_VERSION:
        raise SchemaError(
            f"unsupported model file version {d.get('version')!r} (expected {MODEL_FILE_VERSION})"
        )
    try:
        lib = LibrarySpec.from_dict(d["library"])
        if lib.state_dim != d["state_dim"] or lib.input_dim != d["input_dim"]:
            raise SchemaError("state/input dimensions disagree with the library")
        coef = CoefficientMatrix(np.array(d["coefficients"], dtype=float), lib)
        return SparseModel(coef, lib, tuple(d.get("state_names", ())),
                           tuple(d.get("input_names", ())), dict(d.get("metadata", {})))
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed model file: {exc}") from exc


def save_model(model: SparseModel, path) -> None:
    try:
        Path(path).write_text(json.dumps(model_to_dict(model), indent=2), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_model(path) -> SparseModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    return model_from_dict(d)


def divergence_time(model, *args, **kwargs):
    """Simulate and return ``(series, None)`` or ``(None, blow_up_time)``."""
    try:
        return simulate(model, *args, **kwargs), None
    except DivergenceError as exc:
        return None, exc.time

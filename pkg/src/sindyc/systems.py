"""Benchmark systems, input signals and a fixed-step RK4 integrator.

These generate all training and validation trajectories. The right-hand
sides accept either a single state vector or an ``n x m`` block of states
(with matching input rows), so the same code gives exact derivatives for
whole trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .differentiation import DerivativeEstimate
from .errors import DivergenceError, ParamError
from .timeseries import TimeSeries

RK4_DIVERGENCE = 1e8


@dataclass(frozen=True)
class LotkaVolterraParams:
    """Prey growth ``a``, predation ``b``, predator death ``c``, predator growth ``d``."""

    a: float = 0.5
    b: float = 0.025
    c: float = 0.5
    d: float = 0.005

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) <= 0:
            raise ParamError("Lotka-Volterra rates must be positive")

    def first_integral(self, x1, x2):
        """Conserved quantity of the unforced system."""
        return (self.d * x1 - self.c * np.log(x1)
                + self.b * x2 - self.a * np.log(x2))


LV_DEFAULT_X0 = (60.0, 50.0)

INPUT_MAPS = {
    "identity": lambda u: u,
    "cubic": lambda u: u ** 3,
    "none": lambda u: 0.0 * u,
}


@dataclass(frozen=True)
class LorenzParams:
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    input_map: str = "identity"

    def __post_init__(self):
        if min(self.sigma, self.rho, self.beta) <= 0:
            raise ParamError("Lorenz parameters must be positive")
        if self.input_map not in INPUT_MAPS:
            raise ParamError(f"unknown input map {self.input_map!r}")


def _first_input(u):
    if u is None:
        return 0.0
    a = np.asarray(u, dtype=float)
    if a.ndim == 0:
        return a
    if a.shape[0] == 0:
        return 0.0
    return a[0]


def lotka_volterra_rhs(x, u=None, p=LotkaVolterraParams()):
    """``(a x1 - b x1 x2 + u^2, -c x2 + d x1 x2)``."""
    x1, x2 = x[0], x[1]
    u = _first_input(u)
    return np.array([p.a * x1 - p.b * x1 * x2 + u * u,
                     -p.c * x2 + p.d * x1 * x2])


def lorenz_rhs(x, u=None, p=LorenzParams()):
    """``(sigma (y - x) + g(u), x (rho - z) - y, x y - beta z)``."""
    X, Y, Z = x[0], x[1], x[2]
    g = INPUT_MAPS[p.input_map](_first_input(u))
    return np.array([p.sigma * (Y - X) + g + 0.0 * X,
                     X * (p.rho - Z) - Y,
                     X * Y - p.beta * Z])


SYSTEMS = {
    "lotka_volterra": (LotkaVolterraParams, lotka_volterra_rhs, LV_DEFAULT_X0),
    "lorenz": (LorenzParams, lorenz_rhs, (-8.0, 8.0, 27.0)),
}


def make_system(name, params=None, input_map=None):
    """Return ``(rhs(x, u, t), params, default_x0)`` for a named system."""
    try:
        cls, fn, x0 = SYSTEMS[name]
    except KeyError:
        raise ParamError(f"unknown system {name!r}; choose from {sorted(SYSTEMS)}") from None
    kw = dict(params or {})
    if input_map is not None:
        if cls is not LorenzParams:
            raise ParamError(f"{name} has no configurable input map")
        kw["input_map"] = input_map
    try:
        p = cls(**kw)
    except TypeError as exc:
        raise ParamError(f"bad parameters for {name}: {exc}") from exc
    return (lambda x, u, t: fn(x, u, p)), p, x0


def exact_derivatives(series: TimeSeries, rhs) -> DerivativeEstimate:
    """Evaluate a known right-hand side ``rhs(x, u, t)`` at every sample."""
    vals = rhs(series.states, series.inputs, series.times)
    vals = np.broadcast_to(np.asarray(vals, dtype=float), series.states.shape).copy()
    return DerivativeEstimate(vals, {"method": "exact"})


@dataclass(frozen=True)
class Signal:
    """Declarative description of a scalar input signal.

    Kinds and their parameters:

    * ``sinusoids``: ``terms`` list of ``(amplitude, angular_frequency)``,
      optional ``offset``; ``offset + sum(A sin(w t))``.
    * ``constant``: ``value``.
    * ``white_noise``: ``std`` and ``mean``; a fresh Gaussian sample per step.
    * ``state_feedback``: ``offset``, ``gain`` (one entry per state) and
      ``noise_std``; ``offset + gain . x + d`` with white ``d``.
    * ``step_train``: ``amplitude``, ``period``, ``width``, ``base`` and
      ``random_sign``; kicks of length ``width`` every ``period``.
    """

    kind: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    STOCHASTIC = ("white_noise", "state_feedback")

    def to_dict(self):
        return {"kind": self.kind, **self.params, "seed": self.seed}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kind = d.pop("kind")
        seed = d.pop("seed", None)
        return cls(kind, d, seed)


class _NoiseStream:
    """Per-step i.i.d. Gaussian samples, reproducible for a given seed."""

    def __init__(self, seed, std=1.0, mean=0.0):
        self._rng = np.random.default_rng(seed)
        self._buf = np.empty(0)
        self.std, self.mean = float(std), float(mean)

    def __getitem__(self, k):
        while k >= self._buf.size:
            self._buf = np.concatenate([self._buf, self._rng.standard_normal(4096)])
        return self.mean + self.std * self._buf[k]


class InputFunction:
    """Callable ``u(t)`` built by :func:`make_signal`.

    ``zero_order_hold`` signals that the integrator must evaluate the input
    once per step and hold it over the RK4 sub-steps.
    """

    def __init__(self, fn, zero_order_hold=False, description="", vectorized=False):
        self._fn = fn
        self.vectorized = vectorized
        self.zero_order_hold = zero_order_hold
        self.description = description

    def __call__(self, t):
        return float(self._fn(t))

    def tabulate(self, times):
        """Values at many times at once."""
        if self.vectorized:
            return np.broadcast_to(np.asarray(self._fn(times), dtype=float), np.shape(times))
        return np.array([self(t) for t in times])


def make_signal(signal: Signal, state_probe=None, dt=None, t0=0.0) -> InputFunction:
    """Turn a :class:`Signal` into ``u(t)``.

    Stochastic kinds draw one sample per step of length ``dt`` starting at
    ``t0``. ``state_probe`` is a zero-argument callable returning the current
    state, required by ``state_feedback``.
    """
    p = dict(signal.params)
    kind = signal.kind

    if kind == "sinusoids":
        terms = [(float(a), float(w)) for a, w in p.get("terms", [])]
        offset = float(p.get("offset", 0.0))
        return InputFunction(lambda t: offset + sum(a * np.sin(w * t) for a, w in terms),
                             description=kind, vectorized=True)
    if kind == "constant":
        value = float(p.get("value", 0.0))
        return InputFunction(lambda t: value + 0.0 * np.asarray(t), description=kind,
                             vectorized=True)
    if kind == "step_train":
        amp = float(p.get("amplitude", 1.0))
        period = float(p.get("period", 1.0))
        width = float(p.get("width", 0.1))
        base = float(p.get("base", 0.0))
        if period <= 0 or width < 0:
            raise ParamError("step_train needs period > 0 and width >= 0")
        signs = _NoiseStream(signal.seed) if p.get("random_sign", False) else None

        def kicks(t):
            k = int(np.floor((t - t0) / period + 1e-12))
            on = (t - t0) - k * period < width
            s = 1.0 if signs is None else np.sign(signs[max(k, 0)]) or 1.0
            return base + (amp * s if on else 0.0)

        return InputFunction(kicks, description=kind)

    if kind in Signal.STOCHASTIC:
        if dt is None or dt <= 0:
            raise ParamError(f"{kind} signals need the step size dt")

        def step_index(t):
            return max(int(np.floor((t - t0) / dt + 1e-6)), 0)

        if kind == "white_noise":
            noise = _NoiseStream(signal.seed, p.get("std", 1.0), p.get("mean", 0.0))
            return InputFunction(lambda t: noise[step_index(t)], True, kind)

        if state_probe is None:
            raise ParamError("state_feedback signals need a state probe")
        offset = float(p.get("offset", 0.0))
        gain = np.asarray(p.get("gain", []), dtype=float)
        noise = _NoiseStream(signal.seed, p.get("noise_std", 0.0))

        def feedback(t):
            x = np.asarray(state_probe(), dtype=float)
            if gain.size != x.size:
                raise ParamError(f"feedback gain has {gain.size} entries for {x.size} states")
            return offset + gain @ x + noise[step_index(t)]

        return InputFunction(feedback, True, kind)

    raise ParamError(f"unknown signal kind {kind!r}")


def rk4_integrate(rhs, x0, signal=None, t_span=1.0, dt=0.01, t0=0.0,
                  divergence=RK4_DIVERGENCE, input_names=()) -> TimeSeries:
    """Classical fourth-order Runge-Kutta on a uniform grid.

    ``rhs(x, u, t)`` receives the input vector ``u`` (empty without inputs).
    ``signal`` may be ``None``, a :class:`Signal`, an :class:`InputFunction`,
    a plain callable ``u(t)``, or a list of those (one per input channel).
    Deterministic inputs are sampled at the RK4 sub-step times; inputs that
    request a zero-order hold are evaluated once at the start of each step.
    The returned series records the realized input at every sample.

    Raises:
        DivergenceError: if ``|x|`` exceeds ``divergence`` or turns non-finite.
    """
    if not dt > 0:
        raise ParamError("dt must be positive")
    n_steps = int(round(t_span / dt))
    if n_steps < 1:
        raise ParamError("t_span must cover at least one step")
    x = np.array(x0, dtype=float).ravel()
    state = {"x": x}
    probe = lambda: state["x"]  # noqa: E731

    if signal is None:
        sigs = []
    elif isinstance(signal, (list, tuple)):
        sigs = list(signal)
    else:
        sigs = [signal]
    fns = []
    for s in sigs:
        if isinstance(s, Signal):
            s = make_signal(s, probe, dt, t0)
        elif not isinstance(s, InputFunction):
            s = InputFunction(s)
        fns.append(s)
    q = len(fns)
    hold = [f.zero_order_hold for f in fns]

    times = t0 + dt * np.arange(n_steps + 1)
    X = np.empty((x.size, n_steps + 1))
    U = np.empty((q, n_steps + 1))
    # inputs that do not need a hold are tabulated up front at step and mid-step times
    mids = times[:-1] + dt / 2
    table = {}
    for i, f in enumerate(fns):
        if not hold[i]:
            table[i] = (f.tabulate(times), f.tabulate(mids))
    limit = divergence ** 2

    X[:, 0] = x
    for k in range(n_steps):
        t = times[k]
        state["x"] = x
        for i in range(q):
            if hold[i]:
                U[i, k] = fns[i](t)
            else:
                U[i, k] = table[i][0][k]
        u0 = U[:, k]
        if q and not all(hold):
            uh = u0.copy()
            u1 = u0.copy()
            for i, (at_steps, at_mids) in table.items():
                uh[i] = at_mids[k]
                u1[i] = at_steps[k + 1]
        else:
            uh = u1 = u0
        k1 = rhs(x, u0, t)
        k2 = rhs(x + dt / 2 * k1, uh, t + dt / 2)
        k3 = rhs(x + dt / 2 * k2, uh, t + dt / 2)
        k4 = rhs(x + dt * k3, u1, t + dt)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        sq = x @ x
        if not sq <= limit:
            raise DivergenceError(times[k + 1], float(np.sqrt(sq)))
        X[:, k + 1] = x
    state["x"] = x
    U[:, -1] = [f(times[-1]) for f in fns]
    return TimeSeries(times, X, U if q else None, input_names=tuple(input_names)[:q] or ())

"""Candidate-function libraries over states and inputs.

Inputs are treated as extra channels appended after the states, so a single
graded monomial enumeration over ``(x1..xn, u1..uq)`` produces pure state
terms, pure input terms and every state/input cross term.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from .errors import ParamError, ShapeError


@dataclass(frozen=True)
class TermDescriptor:
    """One library column.

    ``kind`` is ``"constant"``, ``"monomial"`` or ``"trig"``. Monomials carry
    an exponent per combined channel; trig terms carry ``channel``,
    ``frequency`` and ``phase`` (``"sin"`` or ``"cos"``).
    """

    kind: str
    exponents: tuple = ()
    channel: int = -1
    frequency: int = 0
    phase: str = ""

    @property
    def degree(self):
        return sum(self.exponents) if self.kind == "monomial" else 0

    def to_dict(self):
        if self.kind == "constant":
            return {"kind": "constant"}
        if self.kind == "monomial":
            return {"kind": "monomial", "exponents": list(self.exponents)}
        return {"kind": "trig", "channel": self.channel,
                "frequency": self.frequency, "phase": self.phase}


@dataclass(frozen=True)
class LibrarySpec:
    state_dim: int
    input_dim: int = 0
    poly_degree: int = 2
    trig_frequencies: tuple = ()
    include_constant: bool = True
    terms: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.state_dim < 1:
            raise ParamError("state_dim must be >= 1")
        if self.input_dim < 0:
            raise ParamError("input_dim must be >= 0")
        if self.poly_degree < 1:
            raise ParamError("poly_degree must be >= 1")
        freqs = tuple(int(k) for k in self.trig_frequencies)
        if any(k <= 0 for k in freqs) or len(set(freqs)) != len(freqs):
            raise ParamError("trig frequencies must be distinct positive integers")
        object.__setattr__(self, "trig_frequencies", freqs)
        object.__setattr__(self, "terms", tuple(_enumerate_terms(self)))

    @property
    def n_channels(self):
        return self.state_dim + self.input_dim

    def __len__(self):
        return len(self.terms)

    def channel_names(self, state_names=None, input_names=None):
        xs = list(state_names) if state_names else [f"x{i + 1}" for i in range(self.state_dim)]
        if input_names:
            us = list(input_names)
        elif self.input_dim == 1:
            us = ["u"]
        else:
            us = [f"u{i + 1}" for i in range(self.input_dim)]
        return xs + us

    def names(self, channel_names=None):
        channel_names = channel_names or self.channel_names()
        return [term_name(t, channel_names) for t in self.terms]

    def index(self, name, channel_names=None):
        return self.names(channel_names).index(name)

    def to_dict(self):
        return {
            "state_dim": self.state_dim,
            "input_dim": self.input_dim,
            "poly_degree": self.poly_degree,
            "trig_frequencies": list(self.trig_frequencies),
            "include_constant": self.include_constant,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            int(d["state_dim"]),
            int(d.get("input_dim", 0)),
            int(d["poly_degree"]),
            tuple(d.get("trig_frequencies", ())),
            bool(d.get("include_constant", True)),
        )


def _enumerate_terms(spec):
    nc = spec.n_channels
    if spec.include_constant:
        yield TermDescriptor("constant", (0,) * nc)
    for d in range(1, spec.poly_degree + 1):
        # combinations_with_replacement yields graded-lex order within a degree
        for combo in combinations_with_replacement(range(nc), d):
            exps = [0] * nc
            for c in combo:
                exps[c] += 1
            yield TermDescriptor("monomial", tuple(exps))
    for ch in range(nc):
        for k in spec.trig_frequencies:
            yield TermDescriptor("trig", channel=ch, frequency=k, phase="sin")
            yield TermDescriptor("trig", channel=ch, frequency=k, phase="cos")


def build_spec(state_dim, input_dim=0, poly_degree=2, trig_frequencies=(),
               include_constant=True) -> LibrarySpec:
    return LibrarySpec(state_dim, input_dim, poly_degree, tuple(trig_frequencies),
                       include_constant)


def expected_term_count(state_dim, input_dim, poly_degree, n_freqs, include_constant=True):
    nc = state_dim + input_dim
    return comb(nc + poly_degree, poly_degree) - (not include_constant) + 2 * nc * n_freqs


@dataclass(frozen=True, eq=False)
class LibraryMatrix:
    """Library evaluated on data: ``values[j, k]`` is term ``j`` at sample ``k``."""

    values: np.ndarray
    spec: LibrarySpec


def evaluate(spec: LibrarySpec, states, inputs=None) -> LibraryMatrix:
    states = np.atleast_2d(np.asarray(states, dtype=float))
    if states.shape[0] != spec.state_dim:
        raise ShapeError(f"library expects {spec.state_dim} state rows, got {states.shape[0]}")
    if spec.input_dim > 0:
        if inputs is None:
            raise ParamError("library has input terms but no inputs were given")
        inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
        if inputs.shape != (spec.input_dim, states.shape[1]):
            raise ShapeError(
                f"inputs have shape {inputs.shape}, expected {(spec.input_dim, states.shape[1])}"
            )
        chans = np.vstack([states, inputs])
    else:
        if inputs is not None and np.size(inputs) > 0:
            raise ShapeError("library has no input channels but inputs were given")
        chans = states

    m = chans.shape[1]
    out = np.empty((len(spec.terms), m))
    for j, term in enumerate(spec.terms):
        if term.kind == "constant":
            out[j] = 1.0
        elif term.kind == "monomial":
            row = np.ones(m)
            for c, e in enumerate(term.exponents):
                if e == 1:
                    row = row * chans[c]
                elif e > 1:
                    row = row * chans[c] ** e
            out[j] = row
        else:
            fn = np.sin if term.phase == "sin" else np.cos
            out[j] = fn(term.frequency * chans[term.channel])
    return LibraryMatrix(out, spec)


def point_evaluator(spec: LibrarySpec, active=None):
    """Fast evaluator of (a subset of) the library at a single point.

    Returns ``f(chans) -> values`` where ``chans`` is the concatenated
    ``(x, u)`` vector and ``values`` lists the ``active`` terms in order.
    """
    idx = np.arange(len(spec.terms)) if active is None else np.flatnonzero(active)
    terms = [spec.terms[j] for j in idx]
    nc = spec.n_channels
    poly_pos = [k for k, t in enumerate(terms) if t.kind != "trig"]
    trig_pos = [k for k, t in enumerate(terms) if t.kind == "trig"]
    E = np.array([terms[k].exponents for k in poly_pos], dtype=float).reshape(-1, nc)
    tch = np.array([terms[k].channel for k in trig_pos], dtype=int)
    tfr = np.array([terms[k].frequency for k in trig_pos], dtype=float)
    tsin = np.array([terms[k].phase == "sin" for k in trig_pos], dtype=bool)
    out_len = len(terms)
    poly_pos = np.array(poly_pos, dtype=int)
    trig_pos = np.array(trig_pos, dtype=int)

    def f(chans):
        c = np.asarray(chans, dtype=float)
        out = np.empty(out_len)
        if poly_pos.size:
            out[poly_pos] = np.prod(c[None, :] ** E, axis=1)
        if trig_pos.size:
            arg = tfr * c[tch]
            out[trig_pos] = np.where(tsin, np.sin(arg), np.cos(arg))
        return out

    return f


def term_name(term: TermDescriptor, channel_names) -> str:
    if term.kind == "constant":
        return "1"
    if term.kind == "trig":
        arg = channel_names[term.channel]
        if term.frequency != 1:
            arg = f"{term.frequency}*{arg}"
        return f"{term.phase}({arg})"
    parts = []
    for name, e in zip(channel_names, term.exponents):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)

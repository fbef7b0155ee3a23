from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sindyc import LibrarySpec, ParamError, ShapeError, TermDescriptor, build_spec, evaluate
from sindyc import term_name
from sindyc.library import expected_term_count, point_evaluator


def test_scalar_quadratic():
    spec = build_spec(1, 0, 2)
    assert spec.names() == ["1", "x1", "x1^2"]


def test_two_states_one_input():
    spec = build_spec(2, 1, 2)
    assert spec.names() == ["1", "x1", "x2", "u", "x1^2", "x1*x2", "x1*u", "x2^2", "x2*u",
                            "u^2"]


def test_trig_terms():
    spec = build_spec(1, 0, 1, trig_frequencies=[1, 2])
    assert spec.names() == ["1", "x1", "sin(x1)", "cos(x1)", "sin(2*x1)", "cos(2*x1)"]


def test_bad_degree():
    with pytest.raises(ParamError):
        build_spec(2, 0, 0)


def test_evaluate_scalar():
    spec = build_spec(1, 0, 2)
    np.testing.assert_array_equal(evaluate(spec, [[2.0]]).values[:, 0], [1, 2, 4])


def test_cross_term():
    spec = build_spec(1, 1, 2)
    j = spec.names().index("x1*u")
    assert evaluate(spec, [[3.0]], [[2.0]]).values[j, 0] == 6.0


def test_zero_state():
    spec = build_spec(2, 1, 3, trig_frequencies=[1, 3])
    vals = evaluate(spec, np.zeros((2, 4)), np.zeros((1, 4))).values
    for term, row in zip(spec.terms, vals):
        if term.kind == "constant" or term.phase == "cos":
            np.testing.assert_array_equal(row, 1.0)
        else:
            np.testing.assert_array_equal(row, 0.0)


def test_shape_errors():
    spec = build_spec(2, 1, 2)
    with pytest.raises(ShapeError):
        evaluate(spec, np.zeros((3, 5)), np.zeros((1, 5)))
    with pytest.raises(ShapeError):
        evaluate(spec, np.zeros((2, 5)), np.zeros((1, 4)))
    with pytest.raises(ParamError):
        evaluate(spec, np.zeros((2, 5)))


def test_term_names():
    names = ["x1", "x2", "u"]
    assert term_name(TermDescriptor("monomial", (1, 1, 0)), names) == "x1*x2"
    assert term_name(TermDescriptor("monomial", (0, 0, 2)), names) == "u^2"
    assert term_name(TermDescriptor("trig", channel=0, frequency=2, phase="sin"), names) \
        == "sin(2*x1)"


def test_spec_round_trip():
    spec = build_spec(3, 1, 3, [1, 2], include_constant=False)
    assert LibrarySpec.from_dict(spec.to_dict()) == spec


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2), st.integers(1, 4),
       st.lists(st.integers(1, 5), unique=True, max_size=3), st.booleans())
def test_term_count_and_uniqueness(n, q, d, freqs, const):
    spec = build_spec(n, q, d, freqs, const)
    assert len(spec) == expected_term_count(n, q, d, len(freqs), const)
    assert len(spec) == comb(n + q + d, d) - (not const) + 2 * (n + q) * len(freqs)
    assert len(set(spec.terms)) == len(spec)
    assert all(t.degree <= d for t in spec.terms)
    # canonical order does not depend on construction path
    assert build_spec(n, q, d, freqs, const).terms == spec.terms


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2), st.integers(1, 3), st.integers(0, 10_000))
def test_point_evaluator_matches_batch(n, q, d, seed):
    spec = build_spec(n, q, d, [1, 2])
    rng = np.random.default_rng(seed)
    x, u = rng.standard_normal(n), rng.standard_normal(q)
    batch = evaluate(spec, x[:, None], u[:, None] if q else None).values[:, 0]
    np.testing.assert_allclose(point_evaluator(spec)(np.concatenate([x, u])), batch,
                               rtol=1e-12, atol=1e-12)


def test_monomials_match_direct_products():
    spec = build_spec(2, 1, 3)
    rng = np.random.default_rng(1)
    X, U = rng.standard_normal((2, 7)), rng.standard_normal((1, 7))
    chans = np.vstack([X, U])
    vals = evaluate(spec, X, U).values
    for term, row in zip(spec.terms, vals):
        expect = np.prod([chans[c] ** e for c, e in enumerate(term.exponents)], axis=0)
        np.testing.assert_allclose(row, expect, rtol=1e-14)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sindyc import (DataError, GridError, IoError, SchemaError, SizeError, TimeSeries,
                    load_timeseries, save_timeseries, to_snapshot_pair)


def write(path, text):
    path.write_text(text)
    return path


def test_load_basic(tmp_path):
    p = write(tmp_path / "a.csv", "t,x1,x2\n0,1,2\n0.1,3,4\n0.2,5,6\n")
    s = load_timeseries(p)
    assert s.dt == pytest.approx(0.1)
    assert s.n_states == 2 and s.n_samples == 3 and s.inputs is None
    np.testing.assert_array_equal(s.states, [[1, 3, 5], [2, 4, 6]])


def test_load_with_inputs(tmp_path):
    p = write(tmp_path / "a.csv", "t,x1,x2,u1\n0,1,2,7\n0.1,3,4,8\n0.2,5,6,9\n")
    s = load_timeseries(p)
    assert s.n_inputs == 1
    np.testing.assert_array_equal(s.inputs, [[7, 8, 9]])


def test_nonuniform_grid(tmp_path):
    p = write(tmp_path / "a.csv", "t,x1\n0,1\n0.1,2\n0.25,3\n")
    with pytest.raises(GridError):
        load_timeseries(p)


def test_nan_entry(tmp_path):
    p = write(tmp_path / "a.csv", "t,x1\n0,1\n0.1,nan\n0.2,3\n")
    with pytest.raises(DataError):
        load_timeseries(p)


def test_missing_column(tmp_path):
    p = write(tmp_path / "a.csv", "t,x1\n0,1\n0.1,2\n")
    with pytest.raises(SchemaError):
        load_timeseries(p, schema={"t": "time", "x1": "state", "x2": "state"})


def test_unsorted_rows_are_sorted(tmp_path):
    p = write(tmp_path / "a.csv", "t,x1\n0.2,3\n0,1\n0.1,2\n")
    np.testing.assert_array_equal(load_timeseries(p).states, [[1, 2, 3]])


def test_stride(tmp_path):
    p = write(tmp_path / "a.csv", "t,x1\n" + "".join(f"{k / 10},{k}\n" for k in range(7)))
    s = load_timeseries(p, stride=3)
    np.testing.assert_array_equal(s.states, [[0, 3, 6]])


def test_missing_file(tmp_path):
    with pytest.raises(IoError):
        load_timeseries(tmp_path / "nope.csv")


def test_snapshot_pair_scalar():
    s = TimeSeries([0, 1, 2], [[1, 2, 3]])
    pair = to_snapshot_pair(s)
    np.testing.assert_array_equal(pair.current, [[1, 2]])
    np.testing.assert_array_equal(pair.shifted, [[2, 3]])


def test_snapshot_pair_with_inputs():
    s = TimeSeries(np.arange(4.0), np.arange(8.0).reshape(2, 4), [[9, 8, 7, 6]])
    pair = to_snapshot_pair(s)
    assert pair.current.shape == pair.shifted.shape == (2, 3)
    assert pair.inputs_current.shape == (1, 3)
    np.testing.assert_array_equal(pair.shifted, s.states[:, 1:])


def test_single_sample_rejected():
    with pytest.raises(SizeError):
        TimeSeries([0.0], [[1.0]])


def test_unwritable_path(tmp_path):
    s = TimeSeries([0, 1], [[1, 2]])
    with pytest.raises(IoError):
        save_timeseries(s, tmp_path / "missing" / "dir" / "a.csv")


def test_inputs_written_after_states(tmp_path):
    s = TimeSeries([0, 1], [[1, 2], [3, 4]], [[5, 6]])
    save_timeseries(s, tmp_path / "a.csv")
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "t,x1,x2,u1"


finite = st.floats(-1e12, 1e12, allow_nan=False, width=64)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2), st.integers(2, 30),
       st.floats(1e-4, 10.0), st.floats(-100, 100), st.data())
def test_save_load_round_trip_is_exact(tmp_path_factory, n, q, m, dt, t0, data):
    states = data.draw(arrays(float, (n, m), elements=finite))
    inputs = data.draw(arrays(float, (q, m), elements=finite)) if q else None
    times = t0 + dt * np.arange(m)
    s = TimeSeries(times, states, inputs)
    path = tmp_path_factory.mktemp("rt") / "s.csv"
    save_timeseries(s, path)
    assert load_timeseries(path) == s

import csv
import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spikestep.connectivity import Connection
from spikestep.errors import DataError, FormatError
from spikestep.io import (
    events_to_image,
    load_events,
    load_weights,
    read_weights,
    save_events,
    save_weights,
    synth_bars,
    write_metrics_csv,
)
from spikestep.runtime import EventStream, frames_from_events, run_sample

from netgen import random_network, random_sample


def _write(tmp_path, text, name="ev.txt"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_floor_division_within_window(tmp_path):
    s = load_events(_write(tmp_path, "0,1,1,0\n999,2,2,0"), (1, 3, 3), 1000, 4)
    assert s.events[:, 0].tolist() == [0, 0]


def test_window_boundary(tmp_path):
    s = load_events(_write(tmp_path, "1000,1,1,0\n"), (1, 3, 3), 1000, 4)
    assert s.events.tolist() == [[1, 0, 1, 1]]


def test_empty_file(tmp_path):
    s = load_events(_write(tmp_path, ""), (2, 3, 3), 1000, 4)
    assert len(s) == 0 and s.duration == 4 and s.dims == (2, 3, 3)


def test_header_checked(tmp_path):
    s = load_events(_write(tmp_path, "SNNEVT1,4,3,2\n5,3,2,1\n"), (2, 3, 4), 10, 2)
    assert s.events.tolist() == [[0, 1, 2, 3]]
    with pytest.raises(DataError, match="header"):
        load_events(_write(tmp_path, "SNNEVT1,3,3,2\n"), (2, 3, 4), 10, 2)


@pytest.mark.parametrize(
    "text,line",
    [("0,1,1,0\n5,1,x,0\n", 2), ("0,1,1\n", 1), ("0,1,1,0\n-3,0,0,0\n", 2), ("5,0,0,0\n4,0,0,0\n", 2), ("0,0,7,0\n", 1)],
)
def test_bad_lines_name_their_line(tmp_path, text, line):
    with pytest.raises(DataError, match=f":{line}:"):
        load_events(_write(tmp_path, text), (1, 3, 3), 1000, 4)


def test_late_events_dropped_with_count(tmp_path):
    with pytest.warns(UserWarning, match="dropped 2 events"):
        s = load_events(_write(tmp_path, "0,0,0,0\n3999,0,0,0\n4000,1,1,0\n9000,2,2,0\n"), (1, 3, 3), 1000, 4)
    assert len(s) == 2


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**20), window=st.integers(1, 5000))
def test_event_file_round_trip(tmp_path_factory, seed, window):
    rng = np.random.default_rng(seed)
    dims = (int(rng.integers(1, 3)), int(rng.integers(1, 6)), int(rng.integers(1, 6)))
    stream = random_sample(rng, dims, density=0.3)
    path = tmp_path_factory.mktemp("ev") / "s.txt"
    save_events(stream, path, window)
    back = load_events(path, dims, window, stream.duration)
    assert back == stream
    assert np.array_equal(frames_from_events(back), frames_from_events(stream))


@pytest.mark.parametrize("shape,kind", [((3, 2, 5, 5), "conv"), ((4, 18), "dense")])
def test_weight_round_trip_is_bit_exact(tmp_path, shape, kind):
    w = np.random.default_rng(1).random(shape)
    save_weights(Connection(kind, w), tmp_path / "w.snnw")
    conn = Connection(kind, np.zeros(shape))
    load_weights(conn, tmp_path / "w.snnw")
    assert conn.weights.tobytes() == w.tobytes()


def test_weight_file_layout(tmp_path):
    w = np.array([[0.25, 0.5, 1.0]])
    save_weights(Connection("dense", w), tmp_path / "w.snnw")
    raw = (tmp_path / "w.snnw").read_bytes()
    assert raw[:8] == b"SNNWGT1\n"
    assert struct.unpack_from("<IQQ", raw, 8) == (2, 1, 3)
    assert struct.unpack_from("<3d", raw, 28) == (0.25, 0.5, 1.0)


def test_wrong_dims_and_bad_files(tmp_path):
    save_weights(Connection("dense", np.ones((2, 3))), tmp_path / "w.snnw")
    with pytest.raises(FormatError):
        load_weights(Connection("dense", np.ones((3, 2))), tmp_path / "w.snnw")
    (tmp_path / "bad.snnw").write_bytes(b"nonsense")
    with pytest.raises(FormatError):
        read_weights(tmp_path / "bad.snnw")
    (tmp_path / "short.snnw").write_bytes((tmp_path / "w.snnw").read_bytes()[:-8])
    with pytest.raises(FormatError):
        read_weights(tmp_path / "short.snnw")


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_metrics_empty_records(tmp_path):
    write_metrics_csv([], tmp_path / "m.csv")
    assert _rows(tmp_path / "m.csv") == [["sample", "step", "layer", "spike_count", "winner_count", "max_potential"]]


def test_metrics_rows(tmp_path):
    rng = np.random.default_rng(2)
    net = random_network(rng)
    recs = [run_sample(net, random_sample(rng, net.input_dims, duration=2))]
    write_metrics_csv(recs, tmp_path / "m.csv")
    rows = _rows(tmp_path / "m.csv")
    assert len(rows) == 1 + 2 * len(net.stages)
    assert all(len(r) == 6 for r in rows)
    assert all("e" not in r[5].lower() for r in rows[1:])


def test_synth_bars_determinism_and_symmetry():
    a = synth_bars("horizontal", (5, 5), 6, 1)
    assert a == synth_bars("horizontal", (5, 5), 6, 1)
    v = synth_bars("vertical", (5, 5), 6, 1)
    assert np.array_equal(a.events[:, [0, 1, 3, 2]][np.lexsort(a.events[:, [2, 3, 1, 0]].T)], v.events)
    assert {(y, x) for _, _, y, x in a.events} == {(x, y) for _, _, y, x in v.events}


def test_synth_bars_invalid():
    with pytest.raises(DataError):
        synth_bars("horizontal", (2, 5), 6, 0)
    with pytest.raises(ValueError):
        synth_bars("diagonal", (5, 5), 6, 0)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), w=st.integers(3, 12), T=st.integers(1, 20))
def test_synth_bars_jitter_bound(seed, w, T):
    s = synth_bars("horizontal", (3, w), T, seed)
    template = np.rint(s.events[:, 3] * (T - 1) / (w - 1))
    assert np.all(np.abs(s.events[:, 0] - template) <= 1)
    assert np.all((s.events[:, 0] >= 0) & (s.events[:, 0] < T))


def test_events_to_image_weightings():
    s = EventStream([(0, 0, 0, 0), (2, 0, 1, 1), (3, 0, 1, 1)], 4, (1, 2, 2))
    count = events_to_image(s, "count", scale=2.0)
    assert count[0].tolist() == [[1.0, 0.0], [0.0, 2.0]]
    early = events_to_image(s, "early", scale=4.0)
    assert early[0].tolist() == [[4.0, 0.0], [0.0, 3.0]]
    assert not events_to_image(EventStream.empty((1, 2, 2), 4)).any()

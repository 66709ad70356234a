import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spikestep.connectivity import Connection
from spikestep.plasticity import (
    StdpConfig,
    Winner,
    lateral_inhibition,
    rstdp_update,
    select_winners,
    stdp_update,
)

from oracles import brute_winners

INF = np.inf


def test_no_spikes_no_winners():
    assert select_winners(np.full((3, 4, 4), INF), np.zeros((3, 4, 4)), k=3) == []


def test_single_spike_wins():
    t = np.full((3, 5, 5), INF)
    t[2, 3, 3] = 4
    assert select_winners(t, np.zeros_like(t), k=2) == [Winner(2, 3, 3)]


def test_tie_broken_by_flat_index():
    t = np.full((2, 5, 5), INF)
    t[0, 2, 2] = t[1, 2, 3] = 1
    assert select_winners(t, np.ones_like(t), k=2, inhibition_radius=0) == [Winner(0, 2, 2), Winner(1, 2, 3)]


def test_potential_breaks_time_ties_and_radius_excludes():
    t = np.full((2, 5, 5), INF)
    t[0, 2, 2] = t[1, 2, 3] = 1
    pots = np.zeros_like(t)
    pots[1, 2, 3] = 5
    assert select_winners(t, pots, k=2, inhibition_radius=1) == [Winner(1, 2, 3)]


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**20), k=st.integers(1, 4), radius=st.integers(0, 2))
def test_matches_exhaustive_selection(seed, k, radius):
    rng = np.random.default_rng(seed)
    t = np.where(rng.random((3, 4, 4)) < 0.3, rng.integers(0, 4, size=(3, 4, 4)), INF)
    pots = rng.integers(0, 3, size=(3, 4, 4)).astype(float)
    got = [tuple(w) for w in select_winners(t, pots, k, radius)]
    assert got == brute_winners(t, pots, k, radius)


def _conn(w):
    return Connection("dense", np.array(w, dtype=float).reshape(1, -1))


def test_causal_potentiation_with_stabilizer():
    conn = _conn([0.5])
    stdp_update(conn, np.array([[[1.0]]]), np.array([[[2.0]]]), [Winner(0, 0, 0)], StdpConfig(0.1, -0.1, True))
    assert conn.weights[0, 0] == pytest.approx(0.525)


def test_simultaneous_counts_as_causal_and_silent_pre_depresses():
    conn = _conn([0.5, 0.5, 0.5])
    pre = np.array([2.0, 3.0, INF]).reshape(3, 1, 1)
    stdp_update(conn, pre, np.array([[[2.0]]]), [Winner(0, 0, 0)], StdpConfig(0.1, -0.1, False))
    np.testing.assert_allclose(conn.weights[0], [0.6, 0.4, 0.4])


@pytest.mark.parametrize("w", [0.0, 1.0])
def test_fixed_points(w):
    conn = _conn([w, w])
    pre = np.array([0.0, INF]).reshape(2, 1, 1)
    stdp_update(conn, pre, np.array([[[1.0]]]), [Winner(0, 0, 0)], StdpConfig(0.3, -0.3, True))
    assert np.all(conn.weights == w)


def test_no_winners_leaves_weights_bit_identical():
    rng = np.random.default_rng(0)
    conn = Connection("conv", rng.random((2, 1, 3, 3)))
    before = conn.weights.copy()
    stdp_update(conn, np.zeros((1, 5, 5)), np.zeros((2, 3, 3)), [], StdpConfig(0.5, -0.5))
    assert conn.weights.tobytes() == before.tobytes()


def test_conv_update_uses_receptive_field_with_padding():
    conn = Connection("conv", np.full((1, 1, 3, 3), 0.5), padding=1)
    pre = np.full((1, 3, 3), INF)
    pre[0, 0, 0] = 0  # top-left input pixel
    post = np.full((1, 3, 3), INF)
    post[0, 0, 0] = 1
    stdp_update(conn, pre, post, [Winner(0, 0, 0)], StdpConfig(0.1, -0.1, False))
    expected = np.full((3, 3), 0.4)
    expected[1, 1] = 0.6  # kernel centre sits on input (0, 0); the padded border never fired
    np.testing.assert_allclose(conn.weights[0, 0], expected)


def test_winner_out_of_bounds():
    conn = _conn([0.5])
    with pytest.raises(IndexError):
        stdp_update(conn, np.zeros((1, 1, 1)), np.zeros((1, 1, 1)), [Winner(1, 0, 0)], StdpConfig())


def test_rstdp_reward_and_punish():
    reward, punish = StdpConfig(0.04, -0.03, False), StdpConfig(-0.04, 0.03, False)
    pre, post, win = np.zeros((1, 1, 1)), np.ones((1, 1, 1)), [Winner(0, 0, 0)]
    conn = _conn([0.5])
    rstdp_update(conn, pre, post, win, True, reward, punish)
    assert conn.weights[0, 0] == pytest.approx(0.54)
    conn = _conn([0.5])
    rstdp_update(conn, pre, post, win, False, reward, punish)
    assert conn.weights[0, 0] == pytest.approx(0.46)
    conn = _conn([0.5])
    rstdp_update(conn, pre, post, win, True, StdpConfig(0.0, 0.0), punish)
    assert conn.weights[0, 0] == 0.5


def test_rstdp_stabilised_values():
    reward, punish = StdpConfig(0.04, -0.03), StdpConfig(-0.04, 0.03)
    pre, post, win = np.zeros((1, 1, 1)), np.ones((1, 1, 1)), [Winner(0, 0, 0)]
    conn = _conn([0.5])
    rstdp_update(conn, pre, post, win, True, reward, punish)
    assert conn.weights[0, 0] == pytest.approx(0.51)
    conn = _conn([0.5])
    rstdp_update(conn, pre, post, win, False, reward, punish)
    assert conn.weights[0, 0] == pytest.approx(0.49)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**20), stab=st.booleans())
def test_weights_stay_bounded(seed, stab):
    rng = np.random.default_rng(seed)
    conn = Connection("conv", rng.random((3, 2, 3, 3)))
    for _ in range(20):
        pre = np.where(rng.random((2, 5, 5)) < 0.5, rng.integers(0, 5, size=(2, 5, 5)), INF)
        post = np.where(rng.random((3, 3, 3)) < 0.5, rng.integers(0, 5, size=(3, 3, 3)), INF)
        wins = select_winners(post, rng.random((3, 3, 3)), k=3)
        stdp_update(conn, pre, post, wins, StdpConfig(rng.uniform(-2, 2), rng.uniform(-2, 2), stab))
        assert np.all((conn.weights >= 0) & (conn.weights <= 1))


def test_inhibition_single_spike_unchanged():
    s = np.zeros((3, 4, 4))
    s[1, 2, 2] = 1
    np.testing.assert_array_equal(lateral_inhibition(np.zeros_like(s), s), s)


def test_inhibition_keeps_strongest_map_at_location():
    s = np.zeros((2, 3, 3))
    s[:, 1, 1] = 1
    pots = np.zeros_like(s)
    pots[0, 1, 1], pots[1, 1, 1] = 5, 7
    out = lateral_inhibition(pots, s, radius=0)
    assert out[1, 1, 1] == 1 and out[0, 1, 1] == 0


def test_inhibition_radius_zero_different_locations_survive():
    s = np.zeros((2, 3, 3))
    s[0, 0, 0] = s[1, 2, 2] = 1
    np.testing.assert_array_equal(lateral_inhibition(np.ones_like(s), s, 0), s)


def test_inhibition_radius_suppresses_neighbours_of_other_maps():
    s = np.zeros((2, 4, 4))
    s[0, 1, 1] = s[1, 2, 2] = s[0, 1, 2] = 1
    pots = np.zeros_like(s)
    pots[0, 1, 1], pots[1, 2, 2], pots[0, 1, 2] = 3, 2, 1
    out = lateral_inhibition(pots, s, radius=1)
    assert out[0, 1, 1] == 1 and out[0, 1, 2] == 1 and out[1, 2, 2] == 0


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**20))
def test_radius_zero_fast_path_agrees_with_general_rule(seed):
    rng = np.random.default_rng(seed)
    s = (rng.random((3, 4, 4)) < 0.4).astype(float)
    pots = rng.integers(0, 3, size=(3, 4, 4)).astype(float)
    out = lateral_inhibition(pots, s, 0)
    for y in range(4):
        for x in range(4):
            maps = np.flatnonzero(s[:, y, x])
            if maps.size == 0:
                assert not out[:, y, x].any()
            else:
                best = maps[np.argmax(pots[maps, y, x])]
                assert out[:, y, x].tolist() == [1.0 if m == best else 0.0 for m in range(3)]

"""Winner-take-all competition, lateral inhibition and (reward-modulated) STDP.

The STDP rule is multiplicative and only looks at the *order* of the first
pre- and postsynaptic spikes of a sample::

    dw = lr_plus  * S   if t_pre <= t_post   (causal, simultaneity included)
    dw = lr_minus * S   otherwise            (anti-causal or silent pre)

with ``S = w * (1 - w)`` when the stabilizer is on and ``S = 1`` otherwise.
Only synapses into winning neurons change, and weights are clamped to
``[0, 1]`` afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .connectivity import Connection
from .errors import ConfigurationError, ShapeError


@dataclass(frozen=True)
class StdpConfig:
    lr_plus: float = 0.004
    lr_minus: float = -0.003
    use_stabilizer: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.lr_plus) and np.isfinite(self.lr_minus)):
            raise ConfigurationError("learning rates must be finite")


class Winner(NamedTuple):
    feature_map: int
    y: int
    x: int


def select_winners(post_first_spikes, potentials, k: int = 1, inhibition_radius: int = 0) -> list[Winner]:
    """Pick up to ``k`` winners in order of earliest spike.

    Ties on spike time go to the higher potential, then to the lower flat
    index.  Each pick removes its whole feature map and a square
    (Chebyshev) neighbourhood of ``inhibition_radius`` in every other map
    from the pool.  Neurons that never fired cannot win.
    """
    times = np.asarray(post_first_spikes, dtype=np.float64)
    pots = np.asarray(potentials, dtype=np.float64)
    if times.shape != pots.shape or times.ndim != 3:
        raise ShapeError(f"spike-time and potential grids must share a rank-3 shape: {times.shape} vs {pots.shape}")
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    eligible = np.isfinite(times)
    if not eligible.any():
        return []
    # candidates in selection order: time asc, potential desc, flat index asc
    flat = np.flatnonzero(eligible)
    order = np.lexsort((flat, -pots.reshape(-1)[flat], times.reshape(-1)[flat]))
    _, h, w = times.shape
    banned_maps: set[int] = set()
    winners: list[Winner] = []
    for idx in flat[order]:
        c, rem = divmod(int(idx), h * w)
        y, x = divmod(rem, w)
        if c in banned_maps:
            continue
        if any(
            abs(y - win.y) <= inhibition_radius and abs(x - win.x) <= inhibition_radius
            for win in winners
        ):
            continue
        winners.append(Winner(c, y, x))
        banned_maps.add(c)
        if len(winners) == k:
            break
    return winners


def _pre_times_for(conn: Connection, pre_first_spikes: np.ndarray, winner: Winner) -> np.ndarray:
    """First-spike times of every presynaptic neuron wired to ``winner``."""
    if conn.kind == "dense":
        return pre_first_spikes.reshape(-1)
    pre = pre_first_spikes
    if conn.padding:
        p = conn.padding
        pre = np.pad(pre, ((0, 0), (p, p), (p, p)), constant_values=np.inf)
    rows, cols = conn.receptive_field(winner.y, winner.x)
    return pre[:, rows, cols]


def stdp_update(conn: Connection, pre_first_spikes, post_first_spikes, winners: Sequence[Winner], cfg: StdpConfig) -> None:
    """Apply the multiplicative STDP rule in place to synapses into ``winners``."""
    if not winners:
        return
    pre = np.asarray(pre_first_spikes, dtype=np.float64)
    post = np.asarray(post_first_spikes, dtype=np.float64)
    for win in winners:
        c, y, x = win
        if not (0 <= c < post.shape[0] and 0 <= y < post.shape[1] and 0 <= x < post.shape[2]):
            raise IndexError(f"winner {tuple(win)} outside postsynaptic dims {post.shape}")
        if c >= conn.out_channels:
            raise IndexError(f"winner map {c} outside connection with {conn.out_channels} outputs")
        causal = _pre_times_for(conn, pre, win) <= post[c, y, x]
        w = conn.weights[c]
        dw = np.where(causal, cfg.lr_plus, cfg.lr_minus)
        if cfg.use_stabilizer:
            dw = dw * w * (1.0 - w)
        conn.weights[c] = np.clip(w + dw, 0.0, 1.0)


def rstdp_update(
    conn: Connection,
    pre_first_spikes,
    post_first_spikes,
    winners: Sequence[Winner],
    decision_correct: bool,
    cfg_reward: StdpConfig,
    cfg_punish: StdpConfig,
) -> None:
    """STDP with ``cfg_reward`` on a correct decision, ``cfg_punish`` otherwise."""
    cfg = cfg_reward if decision_correct else cfg_punish
    stdp_update(conn, pre_first_spikes, post_first_spikes, winners, cfg)


def lateral_inhibition(potentials, spikes, radius: int = 0) -> np.ndarray:
    """Keep at most one spiking feature map per neighbourhood.

    Spikes are visited from highest to lowest potential (ties: lower map,
    then lower flat index).  A spike survives unless a spike of a
    *different* map already kept lies within Chebyshev distance ``radius``.
    With ``radius == 0`` this keeps, at every location, only the map with
    the strongest potential.
    """
    pots = np.asarray(potentials, dtype=np.float64)
    s = np.asarray(spikes)
    if pots.shape != s.shape:
        raise ShapeError(f"dims mismatch: {pots.shape} vs {s.shape}")
    out = np.zeros(s.shape, dtype=np.float64)
    if radius == 0:
        masked = np.where(s > 0, pots, -np.inf)
        best = np.argmax(masked, axis=0)  # first maximum = lowest map index
        any_spike = (s > 0).any(axis=0)
        ys, xs = np.nonzero(any_spike)
        out[best[ys, xs], ys, xs] = 1.0
        return out
    flat = np.flatnonzero(s > 0)
    order = np.lexsort((flat, -pots.reshape(-1)[flat]))
    _, h, w = s.shape
    kept: list[tuple[int, int, int]] = []
    for idx in flat[order]:
        c, rem = divmod(int(idx), h * w)
        y, x = divmod(rem, w)
        if any(kc != c and abs(ky - y) <= radius and abs(kx - x) <= radius for kc, ky, kx in kept):
            continue
        kept.append((c, y, x))
        out[c, y, x] = 1.0
    return out

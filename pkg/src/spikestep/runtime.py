"""Time-stepped execution of a layer stack over event samples.

Every sample is unrolled into one spike frame per time step.  Each frame is
pushed through the stages in order (connection, neuron layer, optional
lateral inhibition); in training modes learning runs right after the step,
so weight changes affect the following steps of the same sample.  All
layers are reset once the last step of a sample has been processed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .connectivity import Connection
from .errors import ConfigurationError, DataError, ShapeError
from .neurons import NeuronLayer
from .plasticity import StdpConfig, Winner, lateral_inhibition, rstdp_update, select_winners, stdp_update

MODES = ("inference", "train-stdp", "train-rstdp")


class EventStream:
    """A sample as time-ordered ``(t, channel, y, x)`` events on a ``(C, H, W)`` grid."""

    def __init__(self, events, duration: int, dims):
        ev = np.asarray(events, dtype=np.int64).reshape(-1, 4)
        self.duration = int(duration)
        self.dims = tuple(int(d) for d in dims)
        if len(self.dims) != 3:
            raise ShapeError(f"event stream dims must be (C, H, W), got {self.dims}")
        if self.duration < 0:
            raise DataError(f"duration must be >= 0, got {duration}")
        bounds = np.array((self.duration,) + self.dims)
        bad = np.flatnonzero(((ev < 0) | (ev >= bounds)).any(axis=1))
        if bad.size:
            t, c, y, x = ev[bad[0]]
            raise DataError(
                f"event #{bad[0]} (t={t}, c={c}, y={y}, x={x}) outside duration {self.duration} / dims {self.dims}"
            )
        order = np.lexsort((ev[:, 3], ev[:, 2], ev[:, 1], ev[:, 0]))
        self.events = ev[order]

    @classmethod
    def empty(cls, dims, duration: int) -> "EventStream":
        return cls(np.zeros((0, 4), dtype=np.int64), duration, dims)

    def __len__(self) -> int:
        return len(self.events)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.duration == other.duration
            and self.dims == other.dims
            and np.array_equal(self.events, other.events)
        )

    def __repr__(self) -> str:
        return f"EventStream({len(self)} events, duration={self.duration}, dims={self.dims})"


def frames_from_events(sample: EventStream) -> np.ndarray:
    """Dense ``(duration, C, H, W)`` binary frames; duplicate events collapse to one spike."""
    frames = np.zeros((sample.duration,) + sample.dims)
    if len(sample):
        t, c, y, x = sample.events.T
        frames[t, c, y, x] = 1.0
    return frames


@dataclass(frozen=True)
class StdpLearning:
    cfg: StdpConfig = StdpConfig()
    k: int = 1
    inhibition_radius: int = 0


@dataclass(frozen=True)
class RStdpLearning:
    reward: StdpConfig = StdpConfig(0.004, -0.003)
    punish: StdpConfig = StdpConfig(-0.003, 0.004)
    k: int = 1
    inhibition_radius: int = 0


@dataclass
class Stage:
    connection: Connection
    layer: NeuronLayer
    inhibition_radius: Optional[int] = None
    learning: Union[StdpLearning, RStdpLearning, None] = None


class Network:
    """An ordered stack of stages fed by frames of ``input_dims``.

    ``cadence`` is ``"timestep"`` (learn after every step) or ``"sample"``
    (learn once, after the last step).
    """

    def __init__(self, stages: Sequence[Stage], input_dims, cadence: str = "timestep"):
        if not stages:
            raise ConfigurationError("a network needs at least one stage")
        if cadence not in ("timestep", "sample"):
            raise ConfigurationError(f"cadence must be 'timestep' or 'sample', got {cadence!r}")
        self.stages = list(stages)
        self.input_dims = tuple(int(d) for d in input_dims)
        self.cadence = cadence
        dims = self.input_dims
        for i, st in enumerate(self.stages):
            out = st.connection.output_dims(dims)
            if out != st.layer.dims:
                raise ShapeError(f"stage {i}: connection produces {out} but layer has dims {st.layer.dims}")
            dims = out
        ts = {st.layer.params.ts for st in self.stages}
        if len(ts) != 1:
            raise ConfigurationError(f"all layers must share one time step, got {sorted(ts)}")
        self.ts = ts.pop()

    @property
    def output_dims(self) -> tuple[int, int, int]:
        return self.stages[-1].layer.dims

    def reset(self) -> None:
        for st in self.stages:
            st.layer.reset()

    def default_train_stage(self, mode: str) -> Optional[int]:
        want = {"train-stdp": StdpLearning, "train-rstdp": RStdpLearning}.get(mode)
        if want is None:
            return None
        idx = [i for i, st in enumerate(self.stages) if isinstance(st.learning, want)]
        if not idx:
            raise ConfigurationError(f"mode {mode!r} needs a stage with {want.__name__}")
        return idx[0] if mode == "train-stdp" else idx[-1]


@dataclass
class RunRecord:
    """What happened during one sample.

    ``spike_counts``, ``winner_counts`` and ``max_potentials`` have shape
    ``(n_stages, duration)``; spike counts are of the propagated (post
    inhibition) output.  ``max_potentials`` holds the largest potential a
    layer reached in the step, measured before spike resets.
    """

    spike_counts: np.ndarray
    winner_counts: np.ndarray
    max_potentials: np.ndarray
    winners: list = field(default_factory=list)  # (t, stage, Winner)
    output_first_spikes: Optional[np.ndarray] = None
    final_potentials: list = field(default_factory=list)
    fired_counts: list = field(default_factory=list)
    decision: Optional[int] = None
    label: Optional[int] = None
    trace: Optional[dict] = None

    @property
    def duration(self) -> int:
        return self.spike_counts.shape[1]


def decide(first_spikes: np.ndarray, potentials: np.ndarray) -> Optional[int]:
    """Output map that fired first (ties: higher potential, then lower index)."""
    winners = select_winners(first_spikes, potentials, k=1)
    return winners[0].feature_map if winners else None


def run_sample(
    net: Network,
    sample: EventStream,
    mode: str = "inference",
    label: Optional[int] = None,
    train_stage: Optional[int] = None,
    trace: Optional[tuple[int, int, int, int]] = None,
) -> RunRecord:
    """Run one sample through ``net`` and return its :class:`RunRecord`.

    ``trace=(stage, map, y, x)`` additionally records that neuron's
    potential, adaptation and spike flag at every step.
    """
    if mode not in MODES:
        raise ConfigurationError(f"mode must be one of {MODES}, got {mode!r}")
    if sample.dims != net.input_dims:
        raise ShapeError(f"sample dims {sample.dims} do not match network input {net.input_dims}")
    n_out = net.output_dims[0]
    if mode == "train-rstdp" and (label is None or not 0 <= label < n_out):
        raise ConfigurationError(f"label {label!r} is not a valid output map index (0..{n_out - 1})")
    if mode == "inference":
        train_stage = None
    elif train_stage is None:
        train_stage = net.default_train_stage(mode)
    if train_stage is not None:
        learning = net.stages[train_stage].learning
        if learning is None:
            raise ConfigurationError(f"stage {train_stage} has no learning rule")

    n_stages, T = len(net.stages), sample.duration
    frames = frames_from_events(sample)
    spike_counts = np.zeros((n_stages, T), dtype=np.int64)
    winner_counts = np.zeros((n_stages, T), dtype=np.int64)
    max_pots = np.zeros((n_stages, T))
    # first-spike times/potentials of what was propagated: index 0 is the input
    first = [np.full(net.input_dims, np.inf)] + [np.full(st.layer.dims, np.inf) for st in net.stages]
    first_pot = [None] + [np.full(st.layer.dims, -np.inf) for st in net.stages]
    latched: set[Winner] = set()
    winners_log = []
    tr = None
    if trace is not None:
        s, m, y, x = trace
        if not (0 <= s < n_stages) or not all(0 <= v < d for v, d in zip((m, y, x), net.stages[s].layer.dims)):
            raise ConfigurationError(f"trace coordinates {trace} are out of range")
        tr = {"potential": np.zeros(T), "adaptation": np.zeros(T), "spike": np.zeros(T, dtype=np.int64)}

    def learn(t: int) -> None:
        st = net.stages[train_stage]
        post_t, post_p = first[train_stage + 1], first_pot[train_stage + 1]
        lrn = st.learning
        if isinstance(lrn, RStdpLearning):
            decision = decide(first[-1], first_pot[-1])
            if decision is None:
                return
        wins = [w for w in select_winners(post_t, post_p, lrn.k, lrn.inhibition_radius) if w not in latched]
        if not wins:
            return
        pre_t = first[train_stage]
        if isinstance(lrn, RStdpLearning):
            rstdp_update(st.connection, pre_t, post_t, wins, decision == label, lrn.reward, lrn.punish)
        else:
            stdp_update(st.connection, pre_t, post_t, wins, lrn.cfg)
        latched.update(wins)
        winner_counts[train_stage, t] += len(wins)
        winners_log.extend((t, train_stage, w) for w in wins)

    for t in range(T):
        x = frames[t]
        np.minimum(first[0], np.where(x > 0, t, np.inf), out=first[0])
        for i, st in enumerate(net.stages):
            charge = st.connection.forward(x)
            spikes, pots = st.layer.step(charge)
            drive = st.layer.last_drive
            if st.inhibition_radius is not None and spikes.any():
                spikes = lateral_inhibition(drive, spikes, st.inhibition_radius)
            new = (spikes > 0) & np.isinf(first[i + 1])
            if new.any():
                first[i + 1][new] = t
                first_pot[i + 1][new] = drive[new]
            spike_counts[i, t] = int(spikes.sum())
            max_pots[i, t] = float(drive.max())
            if tr is not None and i == trace[0]:
                _, m, yy, xx = trace
                tr["potential"][t] = pots[m, yy, xx]
                tr["adaptation"][t] = st.layer.adaptation[m, yy, xx]
                tr["spike"][t] = int(st.layer.last_spikes[m, yy, xx])
            x = spikes
        if train_stage is not None and (net.cadence == "timestep" or t == T - 1):
            learn(t)

    record = RunRecord(
        spike_counts=spike_counts,
        winner_counts=winner_counts,
        max_potentials=max_pots,
        winners=winners_log,
        output_first_spikes=first[-1].copy(),
        final_potentials=[st.layer.potentials.copy() for st in net.stages],
        fired_counts=[st.layer.fired_this_sample.copy() for st in net.stages],
        decision=decide(first[-1], first_pot[-1]),
        label=label,
        trace=tr,
    )
    net.reset()
    return record


@dataclass
class EpochMetrics:
    n_samples: int
    spike_totals: np.ndarray
    winner_churn: float
    accuracy: Optional[float]
    records: list

    def summary(self) -> str:
        acc = "n/a" if self.accuracy is None else f"{self.accuracy:.3f}"
        spikes = ",".join(str(int(s)) for s in self.spike_totals)
        return f"samples={self.n_samples} spikes=[{spikes}] churn={self.winner_churn:.3f} accuracy={acc}"


def train_epoch(
    net: Network,
    dataset: Iterable[tuple[EventStream, Optional[int]]],
    mode: str = "train-stdp",
    train_stage: Optional[int] = None,
) -> EpochMetrics:
    """Run every sample of ``dataset`` in order and aggregate the records.

    ``winner_churn`` is the fraction of consecutive sample pairs whose first
    winning feature map differs.  ``accuracy`` is computed over labelled
    samples only (``None`` when there are none); samples without an output
    spike count as wrong.
    """
    records = []
    for sample, label in dataset:
        records.append(run_sample(net, sample, mode, label=label, train_stage=train_stage))
    n = len(records)
    totals = np.zeros(len(net.stages), dtype=np.int64)
    for r in records:
        totals += r.spike_counts.sum(axis=1)
    firsts = [r.winners[0][2].feature_map if r.winners else None for r in records]
    churn = sum(a != b for a, b in zip(firsts, firsts[1:])) / (n - 1) if n > 1 else 0.0
    labelled = [r for r in records if r.label is not None]
    accuracy = (
        sum(r.decision == r.label for r in labelled) / len(labelled) if labelled else None
    )
    return EpochMetrics(n, totals, churn, accuracy, records)

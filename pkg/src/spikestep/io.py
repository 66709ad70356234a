"""Event files, synthetic bar samples, weight snapshots and metrics CSVs.

Event file (UTF-8 text)::

    SNNEVT1,<width>,<height>,<channels>
    t,x,y,c
    ...

with ``t`` in microseconds, non-decreasing.  Weight file (binary)::

    b"SNNWGT1\\n" | uint32 ndim | ndim x uint64 dims | float64 values

all little-endian, values row-major.
"""
from __future__ import annotations

import csv
import struct
import warnings
from pathlib import Path

import numpy as np

from .connectivity import Connection
from .errors import DataError, FormatError
from .runtime import EventStream

EVENT_MAGIC = "SNNEVT1"
WEIGHT_MAGIC = b"SNNWGT1\n"
METRICS_HEADER = ("sample", "step", "layer", "spike_count", "winner_count", "max_potential")


def load_events(path, dims, window_us: int, duration_steps: int) -> EventStream:
    """Read an event file and bin it into ``duration_steps`` windows of ``window_us``.

    Events past the last window are dropped with a single warning giving
    their count.
    """
    if window_us < 1:
        raise DataError(f"window_us must be >= 1, got {window_us}")
    dims = tuple(int(d) for d in dims)
    c_max, h_max, w_max = dims
    path = Path(path)
    events = []
    dropped = 0
    last_t = -1
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if lineno == 1 and line.startswith(EVENT_MAGIC):
                parts = line.split(",")
                if len(parts) != 4:
                    raise DataError(f"{path}:1: malformed header {line!r}")
                try:
                    width, height, channels = (int(v) for v in parts[1:])
                except ValueError:
                    raise DataError(f"{path}:1: malformed header {line!r}") from None
                if (channels, height, width) != dims:
                    raise DataError(
                        f"{path}:1: header dims (c={channels}, h={height}, w={width}) do not match {dims}"
                    )
                continue
            fields = line.split(",")
            try:
                if len(fields) != 4:
                    raise ValueError
                t, x, y, c = (int(v) for v in fields)
            except ValueError:
                raise DataError(f"{path}:{lineno}: malformed event line {line!r}") from None
            if min(t, x, y, c) < 0:
                raise DataError(f"{path}:{lineno}: negative field in {line!r}")
            if t < last_t:
                raise DataError(f"{path}:{lineno}: timestamps must be non-decreasing")
            last_t = t
            if x >= w_max or y >= h_max or c >= c_max:
                raise DataError(f"{path}:{lineno}: coordinate (x={x}, y={y}, c={c}) outside dims {dims}")
            step = t // window_us
            if step >= duration_steps:
                dropped += 1
                continue
            events.append((step, c, y, x))
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} events beyond {duration_steps} steps", stacklevel=2)
    return EventStream(np.array(events, dtype=np.int64).reshape(-1, 4), duration_steps, dims)


def save_events(stream: EventStream, path, window_us: int) -> None:
    """Write ``stream`` as an event file; step ``t`` is stored at ``t * window_us``."""
    c, h, w = stream.dims
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{EVENT_MAGIC},{w},{h},{c}\n")
        for t, ch, y, x in stream.events:
            fh.write(f"{t * window_us},{x},{y},{ch}\n")


def synth_bars(kind: str, dims, duration: int, jitter_seed: int, position: int | None = None) -> EventStream:
    """A single-pixel-wide bar swept along its length.

    A horizontal bar occupies row ``position`` (default: the middle row);
    pixel ``x`` spikes at ``round(x * (duration - 1) / (W - 1))`` shifted by a
    seeded jitter in ``{-1, 0, 1}`` and clipped to the sample.  A vertical bar
    is the transpose.
    """
    if kind not in ("horizontal", "vertical"):
        raise ValueError(f"kind must be 'horizontal' or 'vertical', got {kind!r}")
    dims = tuple(int(d) for d in dims)
    if len(dims) == 3:
        if dims[0] != 1:
            raise DataError("synthetic bars are single-channel")
        dims = dims[1:]
    h, w = dims
    if h < 3 or w < 3:
        raise DataError(f"bar samples need at least 3x3 pixels, got {h}x{w}")
    if duration < 1:
        raise DataError("duration must be >= 1")
    length = w if kind == "horizontal" else h
    across = h if kind == "horizontal" else w
    pos = across // 2 if position is None else int(position)
    if not 0 <= pos < across:
        raise DataError(f"bar position {pos} outside 0..{across - 1}")
    along = np.arange(length)
    template = np.rint(along * (duration - 1) / (length - 1)).astype(np.int64)
    jitter = np.random.default_rng(jitter_seed).integers(-1, 2, size=length)
    t = np.clip(template + jitter, 0, duration - 1)
    if kind == "horizontal":
        ys, xs = np.full(length, pos), along
    else:
        ys, xs = along, np.full(length, pos)
    events = np.stack([t, np.zeros(length, dtype=np.int64), ys, xs], axis=1)
    return EventStream(events, duration, (1, h, w))


def events_to_image(stream: EventStream, weighting: str = "count", scale: float = 255.0) -> np.ndarray:
    """Accumulate events into a ``(1, H, W)`` intensity image (channels summed).

    ``weighting="count"`` adds 1 per event; ``"early"`` adds
    ``duration - t`` so pixels that fire sooner come out brighter.  The
    result is rescaled so its maximum equals ``scale``.
    """
    img = np.zeros((1,) + stream.dims[1:])
    if len(stream):
        t, _, y, x = stream.events.T
        if weighting == "count":
            vals = np.ones(len(stream))
        elif weighting == "early":
            vals = (stream.duration - t).astype(np.float64)
        else:
            raise ValueError(f"unknown weighting {weighting!r}")
        np.add.at(img[0], (y, x), vals)
        img *= scale / img.max()
    return img


def save_weights(conn: Connection, path) -> None:
    w = np.ascontiguousarray(conn.weights, dtype="<f8")
    with Path(path).open("wb") as fh:
        fh.write(WEIGHT_MAGIC)
        fh.write(struct.pack("<I", w.ndim))
        fh.write(struct.pack(f"<{w.ndim}Q", *w.shape))
        fh.write(w.tobytes(order="C"))


def read_weights(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if not data.startswith(WEIGHT_MAGIC):
        raise FormatError(f"{path}: not a weight file (bad magic)")
    off = len(WEIGHT_MAGIC)
    try:
        (ndim,) = struct.unpack_from("<I", data, off)
        off += 4
        shape = struct.unpack_from(f"<{ndim}Q", data, off)
        off += 8 * ndim
    except struct.error:
        raise FormatError(f"{path}: truncated header") from None
    n = int(np.prod(shape)) if ndim else 1
    if len(data) - off != 8 * n:
        raise FormatError(f"{path}: expected {n} values for dims {shape}, found {(len(data) - off) / 8:g}")
    return np.frombuffer(data, dtype="<f8", offset=off).reshape(shape).astype(np.float64)


def load_weights(conn: Connection, path) -> None:
    """Replace ``conn.weights`` with the tensor stored at ``path`` (dims must match)."""
    w = read_weights(path)
    if w.shape != conn.weights.shape:
        raise FormatError(f"{path}: weight dims {w.shape} do not match connection dims {conn.weights.shape}")
    if np.any((w < 0) | (w > 1)):
        raise FormatError(f"{path}: weights outside [0, 1]")
    conn.weights = w


def write_metrics_csv(records, path) -> None:
    """One row per (sample, time step, layer) of a sequence of RunRecords."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_HEADER)
        for s, rec in enumerate(records):
            n_layers, T = rec.spike_counts.shape
            for t in range(T):
                for layer in range(n_layers):
                    writer.writerow((
                        s, t, layer,
                        int(rec.spike_counts[layer, t]),
                        int(rec.winner_counts[layer, t]),
                        np.format_float_positional(float(rec.max_potentials[layer, t]), trim="-"),
                    ))

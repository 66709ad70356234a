"""Convolutional and dense synaptic connections.

A connection owns a weight tensor with every entry in ``[0, 1]`` and turns a
presynaptic spike frame into the charge (pC) each postsynaptic neuron
receives during the same time step.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigurationError, ShapeError
from .grid import conv2d, conv_output_dims


@dataclass(frozen=True)
class Constant:
    value: float = 0.5


@dataclass(frozen=True)
class Uniform:
    low: float = 0.0
    high: float = 1.0
    seed: int | None = None


@dataclass(frozen=True)
class NormalClipped:
    mean: float = 0.5
    sd: float = 0.1
    seed: int | None = None


WeightInit = Union[Constant, Uniform, NormalClipped]


def init_weights(dims, init: WeightInit) -> np.ndarray:
    dims = tuple(int(d) for d in dims)
    if isinstance(init, Constant):
        if not 0.0 <= init.value <= 1.0:
            raise ConfigurationError(f"constant init must lie in [0, 1], got {init.value}")
        return np.full(dims, float(init.value))
    if isinstance(init, Uniform):
        if not 0.0 <= init.low <= init.high <= 1.0:
            raise ConfigurationError(
                f"uniform init needs 0 <= low <= high <= 1, got ({init.low}, {init.high})"
            )
        return np.random.default_rng(init.seed).uniform(init.low, init.high, size=dims)
    if isinstance(init, NormalClipped):
        if init.sd < 0:
            raise ConfigurationError(f"normal init sd must be >= 0, got {init.sd}")
        w = np.random.default_rng(init.seed).normal(init.mean, init.sd, size=dims)
        return np.clip(w, 0.0, 1.0)
    raise ConfigurationError(f"unknown weight init {init!r}")


class Connection:
    """Weights plus the wiring rule (``conv`` or ``dense``) that applies them.

    Conv weights have shape ``(out_channels, in_channels, kH, kW)``; dense
    weights ``(out_units, in_units)``, where ``in_units`` is the flattened
    size of the presynaptic frame.  Dense output has dims ``(out_units, 1, 1)``
    so each output feature map is a single neuron.
    """

    def __init__(self, kind: str, weights, stride: int = 1, padding: int = 0, charge_scale: float = 1.0):
        if kind not in ("conv", "dense"):
            raise ConfigurationError(f"connection kind must be 'conv' or 'dense', got {kind!r}")
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != (4 if kind == "conv" else 2):
            raise ShapeError(f"{kind} weights have wrong rank: shape {w.shape}")
        if np.any((w < 0) | (w > 1)) or not np.all(np.isfinite(w)):
            raise ConfigurationError("weights must lie in [0, 1]")
        if stride < 1 or padding < 0:
            raise ConfigurationError(f"invalid stride/padding ({stride}, {padding})")
        self.kind = kind
        self.weights = w
        self.stride = int(stride)
        self.padding = int(padding)
        self.charge_scale = float(charge_scale)

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    def output_dims(self, in_dims) -> tuple[int, int, int]:
        in_dims = tuple(in_dims)
        if self.kind == "dense":
            if int(np.prod(in_dims)) != self.weights.shape[1]:
                raise ShapeError(
                    f"dense connection expects {self.weights.shape[1]} inputs, got dims {in_dims}"
                )
            return (self.weights.shape[0], 1, 1)
        if in_dims[0] != self.weights.shape[1]:
            raise ShapeError(
                f"conv connection expects {self.weights.shape[1]} input channels, got {in_dims[0]}"
            )
        return conv_output_dims(in_dims, self.weights.shape, self.stride, self.padding)

    def forward(self, frame, charge_scale: float | None = None) -> np.ndarray:
        """Charge delivered to each postsynaptic neuron by one spike frame."""
        scale = self.charge_scale if charge_scale is None else charge_scale
        x = np.asarray(frame, dtype=np.float64)
        if self.kind == "conv":
            return conv2d(x, self.weights, self.stride, self.padding) * scale
        if x.size != self.weights.shape[1]:
            raise ShapeError(f"dense connection expects {self.weights.shape[1]} inputs, got {x.size}")
        return (self.weights @ x.reshape(-1) * scale).reshape(-1, 1, 1)

    __call__ = forward

    def receptive_field(self, y: int, x: int) -> tuple[slice, slice]:
        """Rows/cols of the *padded* presynaptic grid feeding output ``(y, x)``."""
        kh, kw = self.weights.shape[2:]
        y0, x0 = y * self.stride, x * self.stride
        return slice(y0, y0 + kh), slice(x0, x0 + kw)

    def __repr__(self) -> str:
        return f"Connection({self.kind}, weights={self.weights.shape})"


def connection_create(kind: str, dims, init: WeightInit = Constant(0.5), **kwargs) -> Connection:
    """Build a :class:`Connection` with freshly initialised weights."""
    return Connection(kind, init_weights(dims, init), **kwargs)

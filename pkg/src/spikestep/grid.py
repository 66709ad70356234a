"""Dense (channels, height, width) arrays and the 2-D convolution used by layers.

Grids are plain ``numpy.ndarray`` objects of rank 3.  Spike frames are grids
whose entries are exactly 0 or 1 for a single time step.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import NumericError, ShapeError


def zeros(dims) -> np.ndarray:
    return np.zeros(tuple(int(d) for d in dims), dtype=np.float64)


def as_grid3(a, name: str = "grid") -> np.ndarray:
    """Return ``a`` as a finite float64 array of rank 3."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 3:
        raise ShapeError(f"{name} must have rank 3 (channels, height, width), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite values")
    return arr


def is_spike_frame(a) -> bool:
    arr = np.asarray(a)
    return arr.ndim == 3 and bool(np.all((arr == 0) | (arr == 1)))


def conv_output_dims(in_dims, kernel_dims, stride: int = 1, padding: int = 0) -> tuple[int, int, int]:
    """Output (channels, height, width) of :func:`conv2d` for the given shapes."""
    _, h, w = in_dims
    out_c, _, kh, kw = kernel_dims
    return (
        int(out_c),
        (h + 2 * padding - kh) // stride + 1,
        (w + 2 * padding - kw) // stride + 1,
    )


def conv2d(frame, weights, stride: int = 1, padding: int = 0) -> np.ndarray:
    """Cross-correlate a (C, H, W) frame with an (O, C, kH, kW) kernel bank.

    Each output value is the sum over the kernel window of ``weight * input``.
    Borders are zero-padded.  No kernel flip is applied (the usual deep
    learning convention); for spike inputs this is the charge each output
    neuron receives.
    """
    x = np.asarray(frame, dtype=np.float64)
    k = np.asarray(weights, dtype=np.float64)
    if x.ndim != 3:
        raise ShapeError(f"input must be (C, H, W), got shape {x.shape}")
    if k.ndim != 4:
        raise ShapeError(f"weights must be (O, C, kH, kW), got shape {k.shape}")
    if stride < 1:
        raise ShapeError(f"stride must be >= 1, got {stride}")
    if padding < 0:
        raise ShapeError(f"padding must be >= 0, got {padding}")
    if x.shape[0] != k.shape[1]:
        raise ShapeError(
            f"input has {x.shape[0]} channels but kernel expects {k.shape[1]}"
        )
    if padding:
        x = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    kh, kw = k.shape[2:]
    if kh > x.shape[1] or kw > x.shape[2]:
        raise ShapeError(
            f"kernel {kh}x{kw} larger than padded input {x.shape[1]}x{x.shape[2]}"
        )
    windows = sliding_window_view(x, (kh, kw), axis=(1, 2))[:, ::stride, ::stride]
    # windows: (C, oH, oW, kH, kW)
    return np.einsum("chwij,ocij->ohw", windows, k, optimize=True)


def pointwise(op: str, a, b) -> np.ndarray:
    """Elementwise ``add``, ``scale`` or ``compare_ge`` between a grid and a grid/scalar."""
    a = np.asarray(a, dtype=np.float64)
    if np.ndim(b) != 0:
        b = np.asarray(b, dtype=np.float64)
        if b.shape != a.shape:
            raise ShapeError(f"dims mismatch: {a.shape} vs {b.shape}")
    if op == "add":
        return a + b
    if op == "scale":
        return a * b
    if op in ("compare_ge", "compare-ge"):
        return (a >= b).astype(np.float64)
    raise ValueError(f"unknown pointwise op {op!r}")

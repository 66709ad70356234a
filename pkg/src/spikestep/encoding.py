"""Frame-to-spike transforms: difference-of-Gaussians contrast and rank latency coding."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ShapeError
from .grid import as_grid3, conv2d
from .runtime import EventStream


@dataclass(frozen=True)
class DoGKernel:
    """Zero-mean difference of two normalised Gaussians.

    ``sigma1 < sigma2`` gives an on-centre kernel, the reverse an off-centre one.
    """

    size: int
    sigma1: float
    sigma2: float
    values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.size < 1 or self.size % 2 == 0:
            raise ConfigurationError(f"DoG kernel size must be a positive odd number, got {self.size}")
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ConfigurationError("DoG sigmas must be > 0")
        r = self.size // 2
        yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
        d2 = (xx * xx + yy * yy).astype(np.float64)

        def gauss(s):
            g = np.exp(-d2 / (2.0 * s * s))
            return g / g.sum()

        k = gauss(self.sigma1) - gauss(self.sigma2)
        object.__setattr__(self, "values", k - k.mean())


def dog_filter(image, kernels, rectify: bool = True) -> np.ndarray:
    """Filter a single-channel image with each kernel (same size, zero padding).

    Returns one channel per kernel; negative responses are set to 0 unless
    ``rectify`` is False.
    """
    img = as_grid3(image, "image")
    if img.shape[0] != 1:
        raise ShapeError(f"image must have a single channel, got {img.shape[0]}")
    if not kernels:
        raise ConfigurationError("at least one DoG kernel is required")
    out = []
    for k in kernels:
        if k.size > min(img.shape[1:]):
            raise ShapeError(f"kernel size {k.size} exceeds image dims {img.shape[1:]}")
        out.append(conv2d(img, k.values[None, None], padding=k.size // 2)[0])
    resp = np.stack(out)
    return np.maximum(resp, 0.0) if rectify else resp


def intensity_to_latency(responses, num_timesteps: int) -> EventStream:
    """One spike per strictly positive response; stronger responses spike earlier.

    Positive values are ranked in descending order (ties broken by flat
    index) and the rank ``r`` out of ``n`` positives spikes at step
    ``floor(r * T / n)``, so the ranks fill ``T`` equal-population bins.
    """
    resp = as_grid3(responses, "responses")
    if num_timesteps < 1:
        raise ConfigurationError(f"num_timesteps must be >= 1, got {num_timesteps}")
    if np.any(resp < 0):
        raise ShapeError("responses must be non-negative")
    flat = resp.reshape(-1)
    pos = np.flatnonzero(flat > 0)
    n = pos.size
    if n == 0:
        return EventStream.empty(resp.shape, num_timesteps)
    order = pos[np.lexsort((pos, -flat[pos]))]
    times = (np.arange(n) * num_timesteps) // n
    c, y, x = np.unravel_index(order, resp.shape)
    events = np.stack([times, c, y, x], axis=1)
    return EventStream(events, num_timesteps, resp.shape)

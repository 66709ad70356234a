"""Stateful spiking neuron layers advanced one time step at a time.

Units follow a single convention: mV for potentials, ms for times, pF for
capacitance and pC for the charge delivered to a neuron during one step, so
that ``charge / C`` is directly a potential increment in mV.

Sub-threshold dynamics per model (``q = Q / C`` is the step's charge term):

* ``IF``:   ``u' = u + q``
* ``LIF``:  ``u' = u_rest + (u - u_rest) * exp(-ts / tau_rc) + q``
* ``EIF``:  ``u' = u + ts/tau_rc * (-(u - u_rest) + delta_t * exp((u - theta_rh) / delta_t)) + q``
* ``QIF``:  ``u' = u + ts/tau_rc * a_quad * (u - u_rest) * (u - u_c) + q``
* ``AdEx``: EIF drift ``- ts/C * w``; ``w' = w + ts/tau_w * (a_adapt * (u - u_rest) - w)``
* ``IZ``:   ``u' = u + ts * (0.04 u^2 + 5 u + 140 - w) + q``;
  ``w' = w + ts * a_adapt * (b_adapt * u - w)``

All but LIF use explicit Euler.  A step runs in four phases: refractory
bookkeeping, sub-threshold update plus charge injection, threshold test
(``u >= threshold``), then spike side effects (reset, adaptation jump,
refractory arm).
"""
from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, NumericError, ShapeError

#: Largest exponent fed to the EIF/AdEx upswing term.
EXP_ARG_MAX = 20.0
#: Potentials above ``threshold + CEILING_MARGIN`` are clipped there (they spike anyway).
CEILING_MARGIN = 100.0
#: Potentials below ``resting_potential - FLOOR_MARGIN`` are clipped there.
FLOOR_MARGIN = 1000.0


class NeuronKind(str, enum.Enum):
    IF = "IF"
    LIF = "LIF"
    EIF = "EIF"
    QIF = "QIF"
    AdEx = "AdEx"
    IZ = "IZ"
    HetLIF = "HetLIF"
    HetEIF = "HetEIF"
    HetQIF = "HetQIF"

    @property
    def heterogeneous(self) -> bool:
        return self.value.startswith("Het")

    @property
    def base(self) -> "NeuronKind":
        """The homogeneous model whose dynamics this kind uses."""
        return NeuronKind(self.value[3:]) if self.heterogeneous else self


_REQUIRED_EXTRAS = {
    NeuronKind.EIF: ("delta_t",),
    NeuronKind.QIF: ("a_quad",),
    NeuronKind.AdEx: ("delta_t", "a_adapt", "b_adapt"),
    NeuronKind.IZ: ("a_adapt", "b_adapt", "d_adapt"),
}


@dataclass(frozen=True)
class NeuronParams:
    """Parameters of a neuron layer.

    The base set (``tau_rc`` .. ``refractory_timesteps``) is shared by every
    model; the remaining fields are only read by the models that use them.
    ``theta_rh`` and ``u_c`` default to three quarters of the way from rest
    to threshold, ``reset_potential`` to the resting potential and ``tau_w``
    to ``tau_rc``.
    """

    tau_rc: float = 10.0
    ts: float = 1.0
    C: float = 1.0
    threshold: float = 20.0
    resting_potential: float = 0.0
    refractory_timesteps: int = 0
    reset_potential: Optional[float] = None
    delta_t: Optional[float] = None
    theta_rh: Optional[float] = None
    a_quad: Optional[float] = None
    u_c: Optional[float] = None
    a_adapt: Optional[float] = None
    b_adapt: Optional[float] = None
    d_adapt: Optional[float] = None
    tau_w: Optional[float] = None
    tau_range: Optional[tuple[float, float]] = None
    tau_spacing: str = "linear"
    seed: Optional[int] = None

    def validate(self, kind: NeuronKind) -> None:
        """Raise :class:`ConfigurationError` if the parameters do not suit ``kind``."""
        kind = NeuronKind(kind)
        if not self.tau_rc > 0:
            raise ConfigurationError(f"tau_rc must be > 0, got {self.tau_rc}")
        if not self.ts > 0:
            raise ConfigurationError(f"ts must be > 0, got {self.ts}")
        if not self.C > 0:
            raise ConfigurationError(f"C must be > 0, got {self.C}")
        if not self.threshold > self.resting_potential:
            raise ConfigurationError(
                f"threshold ({self.threshold}) must exceed resting_potential ({self.resting_potential})"
            )
        if self.refractory_timesteps < 0 or int(self.refractory_timesteps) != self.refractory_timesteps:
            raise ConfigurationError(
                f"refractory_timesteps must be a non-negative integer, got {self.refractory_timesteps}"
            )
        for name in _REQUIRED_EXTRAS.get(kind.base, ()):
            if getattr(self, name) is None:
                raise ConfigurationError(f"{kind.value} neurons require parameter {name!r}")
        if self.delta_t is not None and not self.delta_t > 0:
            raise ConfigurationError(f"delta_t must be > 0, got {self.delta_t}")
        if self.tau_w is not None and not self.tau_w > 0:
            raise ConfigurationError(f"tau_w must be > 0, got {self.tau_w}")
        if kind.heterogeneous:
            if self.tau_range is None:
                raise ConfigurationError(f"{kind.value} neurons require parameter 'tau_range'")
            lo, hi = self.tau_range
            if not (0 < lo <= hi):
                raise ConfigurationError(f"tau_range must satisfy 0 < low <= high, got {self.tau_range}")
            if self.tau_spacing not in ("linear", "random"):
                raise ConfigurationError(
                    f"tau_spacing must be 'linear' or 'random', got {self.tau_spacing!r}"
                )
            if self.tau_spacing == "random" and self.seed is None:
                raise ConfigurationError("tau_spacing 'random' requires parameter 'seed'")

    def resolved(self) -> "NeuronParams":
        """Copy with every defaulted field made explicit."""
        above_rest = 0.75 * (self.threshold - self.resting_potential)
        return dataclasses.replace(
            self,
            reset_potential=self.resting_potential if self.reset_potential is None else self.reset_potential,
            theta_rh=self.resting_potential + above_rest if self.theta_rh is None else self.theta_rh,
            u_c=self.resting_potential + above_rest if self.u_c is None else self.u_c,
            tau_w=self.tau_rc if self.tau_w is None else self.tau_w,
        )


def heterogeneous_taus(n_maps: int, params: NeuronParams) -> np.ndarray:
    """One ``tau_rc`` per feature map drawn from ``params.tau_range``.

    ``linear`` spacing covers the range inclusively; ``random`` draws one
    uniform value per map from a generator seeded with ``params.seed``.
    """
    lo, hi = params.tau_range
    if params.tau_spacing == "random":
        rng = np.random.default_rng(params.seed)
        return rng.uniform(lo, hi, size=n_maps)
    return np.linspace(lo, hi, n_maps)


class NeuronLayer:
    """A (channels, height, width) population of neurons of one model.

    Each channel is one feature map.  Calling the layer with a charge grid
    advances it by one time step and returns ``(spikes, potentials)``.
    """

    def __init__(self, kind, dims, params: NeuronParams):
        self.kind = NeuronKind(kind)
        params.validate(self.kind)
        self.params = params.resolved()
        dims = tuple(int(d) for d in dims)
        if len(dims) != 3 or min(dims) < 1:
            raise ShapeError(f"dims must be three positive counts, got {dims}")
        self.dims = dims
        if self.kind.heterogeneous:
            self.tau = heterogeneous_taus(dims[0], self.params).reshape(-1, 1, 1)
        else:
            self.tau = np.float64(self.params.tau_rc)
        self.reset()

    @property
    def tau_grid(self) -> np.ndarray:
        """Per-neuron membrane time constants (ms)."""
        return np.broadcast_to(self.tau, self.dims).copy()

    def reset(self) -> None:
        """Return every state variable to its post-construction value."""
        p = self.params
        self.potentials = np.full(self.dims, p.resting_potential, dtype=np.float64)
        self.adaptation = np.zeros(self.dims)
        self.refractory_remaining = np.zeros(self.dims, dtype=np.int64)
        self.fired_this_sample = np.zeros(self.dims, dtype=np.int64)
        self.first_spike = np.full(self.dims, np.inf)
        self.first_spike_potential = np.full(self.dims, -np.inf)
        self.last_drive = self.potentials.copy()
        self.last_spikes = np.zeros(self.dims, dtype=bool)
        self.elapsed_timesteps = 0

    def first_spike_times(self) -> np.ndarray:
        """Step index of each neuron's earliest spike this sample (``inf`` if silent)."""
        return self.first_spike.copy()

    def _integrate(self, u: np.ndarray, w: np.ndarray, q: np.ndarray):
        p = self.params
        kind = self.kind.base
        ts, tau, ur = p.ts, self.tau, p.resting_potential
        if kind is NeuronKind.IF:
            return u + q, w
        if kind is NeuronKind.LIF:
            return ur + (u - ur) * np.exp(-ts / tau) + q, w
        if kind in (NeuronKind.EIF, NeuronKind.AdEx):
            arg = np.minimum((u - p.theta_rh) / p.delta_t, EXP_ARG_MAX)
            du = ts / tau * (-(u - ur) + p.delta_t * np.exp(arg))
            if kind is NeuronKind.EIF:
                return u + du + q, w
            du = du - ts / p.C * w
            dw = ts / p.tau_w * (p.a_adapt * (u - ur) - w)
            return u + du + q, w + dw
        if kind is NeuronKind.QIF:
            return u + ts / tau * p.a_quad * (u - ur) * (u - p.u_c) + q, w
        if kind is NeuronKind.IZ:
            du = ts * (0.04 * u * u + 5.0 * u + 140.0 - w)
            dw = ts * p.a_adapt * (p.b_adapt * u - w)
            return u + du + q, w + dw
        raise AssertionError(kind)  # pragma: no cover

    def step(self, input_charge):
        """Advance one time step with ``input_charge`` (pC per neuron).

        Returns the binary spike frame and a read-only view of the
        post-step potentials.
        """
        q = np.asarray(input_charge, dtype=np.float64)
        if q.shape != self.dims:
            raise ShapeError(f"input charge has shape {q.shape}, layer expects {self.dims}")
        if not np.all(np.isfinite(q)):
            raise NumericError("input charge contains non-finite values")
        p = self.params

        refractory = self.refractory_remaining > 0
        counter = self.refractory_remaining - refractory

        u, w = self._integrate(self.potentials, self.adaptation, q / p.C)
        u = np.clip(u, p.resting_potential - FLOOR_MARGIN, p.threshold + CEILING_MARGIN)
        u = np.where(refractory, p.reset_potential, u)

        spiked = (u >= p.threshold) & ~refractory
        self.last_drive = u.copy()
        self.last_spikes = spiked
        if spiked.any():
            u = np.where(spiked, p.reset_potential, u)
            if self.kind.base is NeuronKind.AdEx:
                w = w + spiked * p.b_adapt
            elif self.kind.base is NeuronKind.IZ:
                w = w + spiked * p.d_adapt
            counter = np.where(spiked, p.refractory_timesteps, counter)
            new_first = spiked & np.isinf(self.first_spike)
            self.first_spike = np.where(new_first, self.elapsed_timesteps, self.first_spike)
            self.first_spike_potential = np.where(new_first, self.last_drive, self.first_spike_potential)
            self.fired_this_sample = self.fired_this_sample + spiked

        self.potentials = u
        self.adaptation = w
        self.refractory_remaining = counter
        self.elapsed_timesteps += 1

        view = u.view()
        view.flags.writeable = False
        return spiked.astype(np.float64), view

    __call__ = step

    def __repr__(self) -> str:
        return f"NeuronLayer({self.kind.value}, dims={self.dims})"


def layer_create(kind, dims, params: NeuronParams) -> NeuronLayer:
    return NeuronLayer(kind, dims, params)

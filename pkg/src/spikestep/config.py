"""Experiment configuration: schema, validation, and construction of networks/datasets.

An experiment is described by one YAML document.  Unknown keys anywhere are
rejected so that typos fail loudly instead of silently falling back to a
default.  :func:`resolve` fills in every default (derived seeds, neuron
parameter defaults) so that the echoed file fully pins a run.
"""
from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .connectivity import Connection, Constant, NormalClipped, Uniform, init_weights
from .encoding import DoGKernel, dog_filter, intensity_to_latency
from .errors import ConfigurationError
from .io import events_to_image, load_events, synth_bars
from .neurons import NeuronKind, NeuronLayer, NeuronParams
from .plasticity import StdpConfig
from .runtime import EventStream, Network, RStdpLearning, Stage, StdpLearning


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DogKernelConfig(_Strict):
    size: int = 5
    sigma1: float = 1.0
    sigma2: float = 2.0


class InputConfig(_Strict):
    dims: tuple[int, int, int]
    encoding: Literal["events", "dog_latency"] = "events"
    timesteps: int = Field(ge=1)
    dog_kernels: list[DogKernelConfig] = Field(default_factory=list)
    image_weighting: Literal["count", "early"] = "early"

    @model_validator(mode="after")
    def _kernels_present(self):
        if self.encoding == "dog_latency" and not self.dog_kernels:
            raise ValueError("dog_latency encoding needs at least one entry in dog_kernels")
        return self


class EventFile(_Strict):
    path: str
    label: Optional[int] = None


class DatasetConfig(_Strict):
    kind: Literal["synth_bars", "event_files"] = "synth_bars"
    samples_per_class: int = Field(default=10, ge=0)
    seed: Optional[int] = None
    files: list[EventFile] = Field(default_factory=list)
    window_us: int = Field(default=1000, ge=1)


class InitConfig(_Strict):
    kind: Literal["constant", "uniform", "normal_clipped"] = "uniform"
    value: Optional[float] = None
    low: Optional[float] = None
    high: Optional[float] = None
    mean: Optional[float] = None
    sd: Optional[float] = None
    seed: Optional[int] = None


class ConnectionConfig(_Strict):
    kind: Literal["conv", "dense"]
    out_channels: int = Field(ge=1)
    kernel_size: Optional[tuple[int, int]] = None
    stride: int = Field(default=1, ge=1)
    padding: int = Field(default=0, ge=0)
    charge_scale: float = 1.0
    init: InitConfig = Field(default_factory=InitConfig)

    @model_validator(mode="after")
    def _kernel_for_conv(self):
        if self.kind == "conv" and self.kernel_size is None:
            raise ValueError("conv connections need kernel_size")
        return self


class NeuronConfig(_Strict):
    kind: NeuronKind = NeuronKind.LIF
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
    tau_spacing: Literal["linear", "random"] = "linear"
    seed: Optional[int] = None

    def params(self) -> NeuronParams:
        return NeuronParams(**self.model_dump(exclude={"kind"}))


class InhibitionConfig(_Strict):
    radius: int = Field(default=0, ge=0)


class RatesConfig(_Strict):
    lr_plus: float
    lr_minus: float
    use_stabilizer: bool = True

    def stdp(self) -> StdpConfig:
        return StdpConfig(self.lr_plus, self.lr_minus, self.use_stabilizer)


class StdpRuleConfig(_Strict):
    rule: Literal["stdp"]
    lr_plus: float = 0.004
    lr_minus: float = -0.003
    use_stabilizer: bool = True
    k: int = Field(default=1, ge=1)
    inhibition_radius: int = Field(default=0, ge=0)


class RStdpRuleConfig(_Strict):
    rule: Literal["rstdp"]
    reward: RatesConfig = RatesConfig(lr_plus=0.004, lr_minus=-0.003)
    punish: RatesConfig = RatesConfig(lr_plus=-0.003, lr_minus=0.004)
    k: int = Field(default=1, ge=1)
    inhibition_radius: int = Field(default=0, ge=0)


LearningConfig = Annotated[Union[StdpRuleConfig, RStdpRuleConfig], Field(discriminator="rule")]


class StageConfig(_Strict):
    connection: ConnectionConfig
    neuron: NeuronConfig = Field(default_factory=NeuronConfig)
    inhibition: Optional[InhibitionConfig] = None
    learning: Optional[LearningConfig] = None


class ScheduleEntry(_Strict):
    stage: int = Field(ge=0)
    epochs: int = Field(default=1, ge=0)


class RunConfig(_Strict):
    seed: int = 0
    cadence: Literal["timestep", "sample"] = "timestep"
    schedule: list[ScheduleEntry] = Field(default_factory=list)
    output_dir: str = "run"


class ExperimentConfig(_Strict):
    input: InputConfig
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    stages: list[StageConfig] = Field(min_length=1)
    run: RunConfig = Field(default_factory=RunConfig)

    @model_validator(mode="after")
    def _schedule_refers_to_learning_stages(self):
        for entry in self.run.schedule:
            if entry.stage >= len(self.stages):
                raise ValueError(f"run.schedule refers to stage {entry.stage}, but only {len(self.stages)} stages exist")
            if self.stages[entry.stage].learning is None:
                raise ValueError(f"run.schedule trains stage {entry.stage}, which has no learning rule")
        return self

    @property
    def network_input_dims(self) -> tuple[int, int, int]:
        c, h, w = self.input.dims
        if self.input.encoding == "dog_latency":
            return (len(self.input.dog_kernels), h, w)
        return (c, h, w)


def _format_validation_error(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"])
        lines.append(f"{loc}: {e['msg']}")
    return "invalid configuration:\n  " + "\n  ".join(lines)


def load_config(path) -> ExperimentConfig:
    """Parse and validate a YAML experiment file.

    Raises :class:`ConfigurationError` with one line per offending field.
    """
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config {path} must be a mapping at top level")
    try:
        cfg = ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigurationError(_format_validation_error(exc)) from None
    return resolve(cfg)


def resolve(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill every implicit default so that the dump of the result pins the run."""
    cfg = cfg.model_copy(deep=True)
    if cfg.dataset.seed is None:
        cfg.dataset.seed = cfg.run.seed
    dims = cfg.network_input_dims
    for i, st in enumerate(cfg.stages):
        init = st.connection.init
        if init.kind in ("uniform", "normal_clipped") and init.seed is None:
            init.seed = cfg.run.seed + 1000 * (i + 1)
        if init.kind == "constant" and init.value is None:
            init.value = 0.5
        if init.kind == "uniform":
            init.low = 0.0 if init.low is None else init.low
            init.high = 1.0 if init.high is None else init.high
        if init.kind == "normal_clipped":
            init.mean = 0.8 if init.mean is None else init.mean
            init.sd = 0.05 if init.sd is None else init.sd
        nc = st.neuron
        if nc.kind.heterogeneous and nc.tau_spacing == "random" and nc.seed is None:
            nc.seed = cfg.run.seed + 1000 * (i + 1) + 1
        params = nc.params()
        try:
            params.validate(nc.kind)
        except ConfigurationError as exc:
            raise ConfigurationError(f"stages.{i}.neuron: {exc}") from None
        for name, value in dataclasses.asdict(params.resolved()).items():
            setattr(nc, name, value)
        conn = build_connection(st.connection, dims, where=f"stages.{i}.connection")
        dims = conn.output_dims(dims)
    return cfg


def dump_config(cfg: ExperimentConfig, path) -> None:
    data = cfg.model_dump(mode="json")
    Path(path).write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")


def _weight_init(init: InitConfig):
    if init.kind == "constant":
        return Constant(init.value)
    if init.kind == "uniform":
        return Uniform(init.low, init.high, init.seed)
    return NormalClipped(init.mean, init.sd, init.seed)


def build_connection(cc: ConnectionConfig, in_dims, where: str = "connection") -> Connection:
    if cc.kind == "conv":
        kh, kw = cc.kernel_size
        shape = (cc.out_channels, in_dims[0], kh, kw)
    else:
        shape = (cc.out_channels, int(np.prod(in_dims)))
    try:
        weights = init_weights(shape, _weight_init(cc.init))
        conn = Connection(cc.kind, weights, stride=cc.stride, padding=cc.padding, charge_scale=cc.charge_scale)
        conn.output_dims(in_dims)
        if cc.kind == "conv":
            _, oh, ow = conn.output_dims(in_dims)
            if oh < 1 or ow < 1:
                raise ConfigurationError(f"kernel {cc.kernel_size} does not fit input dims {tuple(in_dims)}")
    except (ConfigurationError, ValueError) as exc:
        raise ConfigurationError(f"{where}: {exc}") from None
    return conn


def build_network(cfg: ExperimentConfig) -> Network:
    dims = cfg.network_input_dims
    stages = []
    for i, st in enumerate(cfg.stages):
        conn = build_connection(st.connection, dims, where=f"stages.{i}.connection")
        out = conn.output_dims(dims)
        layer = NeuronLayer(st.neuron.kind, out, st.neuron.params())
        learning = None
        if isinstance(st.learning, StdpRuleConfig):
            learning = StdpLearning(
                StdpConfig(st.learning.lr_plus, st.learning.lr_minus, st.learning.use_stabilizer),
                st.learning.k,
                st.learning.inhibition_radius,
            )
        elif isinstance(st.learning, RStdpRuleConfig):
            learning = RStdpLearning(st.learning.reward.stdp(), st.learning.punish.stdp(), st.learning.k, st.learning.inhibition_radius)
        radius = st.inhibition.radius if st.inhibition is not None else None
        stages.append(Stage(conn, layer, radius, learning))
        dims = out
    return Network(stages, cfg.network_input_dims, cadence=cfg.run.cadence)


def encode(cfg: ExperimentConfig, stream: EventStream) -> EventStream:
    """Apply the configured input encoding to a raw event sample."""
    if cfg.input.encoding == "events":
        return stream
    kernels = [DoGKernel(k.size, k.sigma1, k.sigma2) for k in cfg.input.dog_kernels]
    image = events_to_image(stream, cfg.input.image_weighting)
    return intensity_to_latency(dog_filter(image, kernels), cfg.input.timesteps)


def build_dataset(cfg: ExperimentConfig) -> list[tuple[EventStream, Optional[int]]]:
    """Encoded ``(sample, label)`` pairs in a fixed, seed-determined order."""
    ds = cfg.dataset
    raw: list[tuple[EventStream, Optional[int]]] = []
    if ds.kind == "synth_bars":
        c, h, w = cfg.input.dims
        if c != 1:
            raise ConfigurationError("input.dims: synth_bars samples are single-channel")
        rng = np.random.default_rng(ds.seed)
        for _ in range(ds.samples_per_class):
            for label, kind in enumerate(("horizontal", "vertical")):
                seed = int(rng.integers(2**31))
                raw.append((synth_bars(kind, (h, w), cfg.input.timesteps, seed), label))
        raw = [raw[i] for i in rng.permutation(len(raw))]
    else:
        for f in ds.files:
            stream = load_events(f.path, cfg.input.dims, ds.window_us, cfg.input.timesteps)
            raw.append((stream, f.label))
    return [(encode(cfg, s), label) for s, label in raw]

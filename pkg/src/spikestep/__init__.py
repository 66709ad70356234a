"""Time-stepped spiking neural networks with local STDP learning."""
from .connectivity import Connection, Constant, NormalClipped, Uniform, connection_create
from .encoding import DoGKernel, dog_filter, intensity_to_latency
from .errors import (
    ConfigurationError,
    DataError,
    FormatError,
    NumericError,
    ShapeError,
    SpikeStepError,
)
from .grid import conv2d, pointwise
from .neurons import NeuronKind, NeuronLayer, NeuronParams, layer_create
from .plasticity import StdpConfig, Winner, lateral_inhibition, rstdp_update, select_winners, stdp_update
from .runtime import (
    EpochMetrics,
    EventStream,
    Network,
    RStdpLearning,
    RunRecord,
    Stage,
    StdpLearning,
    frames_from_events,
    run_sample,
    train_epoch,
)

__version__ = "0.1.0"

#!/usr/bin/env python3
# The full loop from a YAML experiment: STDP features, then an R-STDP readout.
#
# Equivalent to
#     spikestep train configs/bars.yaml --out-dir runs/bars
#     spikestep infer configs/bars.yaml runs/bars/weights --out-dir runs/bars
# but driven from Python so intermediate state can be inspected.
# Run from the repository root:  python3 demos/03_bars_experiment.py

from pathlib import Path

import numpy as np

from spikestep.config import build_dataset, build_network, load_config
from spikestep.runtime import RStdpLearning, train_epoch

cfg = load_config(Path(__file__).resolve().parent.parent / "configs" / "bars.yaml")
net = build_network(cfg)
data = build_dataset(cfg)
print(f"{len(data)} samples, network input {net.input_dims}, stages "
      f"{[st.layer.dims for st in net.stages]}")

# %% layer-wise schedule: only one stage learns at a time
for entry in cfg.run.schedule:
    rstdp = isinstance(net.stages[entry.stage].learning, RStdpLearning)
    mode = "train-rstdp" if rstdp else "train-stdp"
    for epoch in range(entry.epochs):
        m = train_epoch(net, data, mode, train_stage=entry.stage)
        print(f"stage {entry.stage} {mode:11s} epoch {epoch}: {m.summary()}")

# %% frozen weights, fresh pass
m = train_epoch(net, data, "inference")
print(f"\ninference accuracy {m.accuracy:.3f}")

# %% the readout weights show which feature maps vote for which class
dense = net.stages[1].connection.weights.reshape(2, net.stages[0].layer.dims[0], -1)
np.set_printoptions(precision=2, suppress=True)
print("mean readout weight per (class, feature map):")
print(dense.mean(axis=2))

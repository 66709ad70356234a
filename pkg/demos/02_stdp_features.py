#!/usr/bin/env python3
# Unsupervised STDP on a conv layer learns bar orientations.
#
# Horizontal and vertical bars are DoG filtered and latency coded, then a
# four-map conv layer learns with winner-take-all STDP.  Printing the on-centre
# half of each kernel shows which maps specialised on which orientation.
# Run with:  python3 demos/02_stdp_features.py

import numpy as np

from spikestep import (
    DoGKernel, NeuronLayer, NeuronParams, NormalClipped, Network, Stage, StdpConfig,
    StdpLearning, connection_create, dog_filter, intensity_to_latency, train_epoch,
)
from spikestep.io import events_to_image, synth_bars

H = W = 9
T = 8
kernels = [DoGKernel(5, 1.0, 2.0), DoGKernel(5, 2.0, 1.0)]

rng = np.random.default_rng(0)
data = []
for _ in range(100):
    for label, kind in enumerate(("horizontal", "vertical")):
        bar = synth_bars(kind, (H, W), T, int(rng.integers(2**31)))
        image = events_to_image(bar, "early")
        data.append((intensity_to_latency(dog_filter(image, kernels), T), label))

conv = connection_create("conv", (4, 2, 5, 5), NormalClipped(0.8, 0.05, seed=1))
layer = NeuronLayer("LIF", (4, H - 4, W - 4), NeuronParams(tau_rc=20.0, threshold=6.0, refractory_timesteps=T))
learning = StdpLearning(StdpConfig(0.04, -0.03), k=2, inhibition_radius=2)
net = Network([Stage(conv, layer, inhibition_radius=0, learning=learning)], (2, H, W))

# %% two passes over the data
for epoch in range(2):
    m = train_epoch(net, data, "train-stdp")
    print(f"epoch {epoch}: {m.summary()}")

# %% weights converge towards 0 or 1; print the on-centre channel of each map
np.set_printoptions(precision=1, suppress=True)
for i, k in enumerate(conv.weights[:, 0]):
    print(f"\nmap {i}:\n{k}")

# %% which map answers first for each orientation?
m = train_epoch(net, data, "inference")
for label, name in enumerate(("horizontal", "vertical")):
    firsts = [int(np.argmin(r.output_first_spikes.min(axis=(1, 2)))) for r in m.records
              if r.label == label and np.isfinite(r.output_first_spikes).any()]
    print(f"{name:10s} first-responding map histogram: {np.bincount(firsts, minlength=4).tolist()}")

#!/usr/bin/env python3
# Membrane traces of every neuron model under the same step current.
#
# Each layer is a single neuron.  A constant charge arrives every step
# from t = 10 to t = 60 ms; we print a coarse text plot of the potential
# and count spikes.  Run with:  python3 demos/01_neuron_traces.py

import numpy as np

from spikestep import NeuronLayer, NeuronParams

T = 100
drive = np.zeros(T)
drive[10:60] = 3.0

models = {
    "IF": NeuronParams(),
    "LIF": NeuronParams(tau_rc=10.0),
    "EIF": NeuronParams(tau_rc=10.0, delta_t=2.0),
    "QIF": NeuronParams(tau_rc=10.0, a_quad=0.05),
    "AdEx": NeuronParams(tau_rc=10.0, delta_t=2.0, a_adapt=0.05, b_adapt=0.3, tau_w=40.0),
}

# %% run every model through the same input
traces = {}
for kind, params in models.items():
    layer = NeuronLayer(kind, (1, 1, 1), params)
    u = np.empty(T)
    spikes = np.zeros(T, dtype=int)
    for t in range(T):
        s, pot = layer.step(np.full((1, 1, 1), drive[t]))
        u[t], spikes[t] = pot[0, 0, 0], int(s[0, 0, 0])
    traces[kind] = (u, spikes)
    isi = np.diff(np.flatnonzero(spikes))
    print(f"{kind:5s} spikes={spikes.sum():3d}  inter-spike intervals={isi.tolist()}")

# AdEx intervals grow as adaptation builds up while EIF, with the same
# exponential term but no adaptation, stays regular.

# %% a rough ASCII view, one row per model, one column per 2 ms
print()
for kind, (u, spikes) in traces.items():
    row = "".join("|" if spikes[t:t + 2].any() else " .:-=+*#"[min(7, max(0, int(u[t] / 2.6)))]
                  for t in range(0, T, 2))
    print(f"{kind:5s} {row}")

# %% Izhikevich uses its own canonical units (rest -65 mV, peak 30 mV)
iz = NeuronLayer("IZ", (1, 1, 1), NeuronParams(resting_potential=-65.0, threshold=30.0,
                                               a_adapt=0.02, b_adapt=0.2, d_adapt=8.0))
iz.adaptation[:] = -13.0
spike_times = [t for t in range(T) if iz.step(np.full((1, 1, 1), 10.0 if t >= 10 else 0.0))[0].any()]
print(f"\nIZ regular spiking with I=10: spikes at {spike_times}")

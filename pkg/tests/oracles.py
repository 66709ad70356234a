"""Independent reference computations used as test oracles.

Nothing here imports the simulation code paths under test; the ODE
right-hand sides are written out from the model definitions and integrated
with classic RK4 at a much finer step.
"""
import math

import numpy as np


def rhs(kind, p, current):
    """Continuous-time derivative ``(du/dt, dw/dt)`` for a constant input current (pA)."""
    ur, tau, C = p["resting_potential"], p["tau_rc"], p["C"]

    if kind == "LIF":
        return lambda u, w: (-(u - ur) / tau + current / C, 0.0)
    if kind == "EIF":
        d, th = p["delta_t"], p["theta_rh"]
        return lambda u, w: ((-(u - ur) + d * math.exp((u - th) / d)) / tau + current / C, 0.0)
    if kind == "QIF":
        a, uc = p["a_quad"], p["u_c"]
        return lambda u, w: (a * (u - ur) * (u - uc) / tau + current / C, 0.0)
    if kind == "AdEx":
        d, th, a, tw = p["delta_t"], p["theta_rh"], p["a_adapt"], p["tau_w"]
        return lambda u, w: (
            (-(u - ur) + d * math.exp((u - th) / d)) / tau - w / C + current / C,
            (a * (u - ur) - w) / tw,
        )
    if kind == "IZ":
        a, b = p["a_adapt"], p["b_adapt"]
        return lambda u, w: (0.04 * u * u + 5 * u + 140 - w + current / C, a * (b * u - w))
    raise ValueError(kind)


def rk4_trajectory(kind, p, current, u0, w0, dt, n_steps, substeps=100):
    """Potential after each of ``n_steps`` steps of ``dt``, using RK4 at ``dt / substeps``."""
    f = rhs(kind, p, current)
    h = dt / substeps
    u, w = float(u0), float(w0)
    out = np.empty(n_steps)
    for i in range(n_steps):
        for _ in range(substeps):
            k1 = f(u, w)
            k2 = f(u + h / 2 * k1[0], w + h / 2 * k1[1])
            k3 = f(u + h / 2 * k2[0], w + h / 2 * k2[1])
            k4 = f(u + h * k3[0], w + h * k3[1])
            u += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            w += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        out[i] = u
    return out


def lif_decay(u0, u_rest, tau, ts, k):
    """Closed-form membrane potential after ``k`` input-free steps."""
    return u_rest + (u0 - u_rest) * math.exp(-k * ts / tau)


def brute_conv2d(x, k, stride=1, padding=0):
    """Quadruple-loop cross-correlation."""
    c, h, w = x.shape
    o, _, kh, kw = k.shape
    xp = np.zeros((c, h + 2 * padding, w + 2 * padding))
    xp[:, padding : padding + h, padding : padding + w] = x
    oh = (h + 2 * padding - kh) // stride + 1
    ow = (w + 2 * padding - kw) // stride + 1
    out = np.zeros((o, oh, ow))
    for oc in range(o):
        for i in range(oh):
            for j in range(ow):
                s = 0.0
                for ic in range(c):
                    for a in range(kh):
                        for b in range(kw):
                            s += xp[ic, i * stride + a, j * stride + b] * k[oc, ic, a, b]
                out[oc, i, j] = s
    return out


def brute_winners(times, pots, k, radius):
    """Exhaustive winner selection: rescan every eligible neuron each round."""
    c, h, w = times.shape
    chosen = []
    for _ in range(k):
        best = None
        for m in range(c):
            if any(m == cm for cm, _, _ in chosen):
                continue
            for y in range(h):
                for x in range(w):
                    if not np.isfinite(times[m, y, x]):
                        continue
                    if any(abs(y - cy) <= radius and abs(x - cx) <= radius for _, cy, cx in chosen):
                        continue
                    key = (times[m, y, x], -pots[m, y, x], (m * h + y) * w + x)
                    if best is None or key < best[0]:
                        best = (key, (m, y, x))
        if best is None:
            break
        chosen.append(best[1])
    return chosen

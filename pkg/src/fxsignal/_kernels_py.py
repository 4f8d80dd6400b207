"""Pure-numpy LSTM time-loop kernels (fallback backend).

Semantics are shared with the compiled extension in ``_kernels.pyx``: the
driver precomputes input projections and consumes gate caches, so each
kernel only walks the time axis.  Gate layout along the last axis is
[input, forget, cell-candidate, output] in blocks of the hidden size.
"""

from __future__ import annotations

import numpy as np


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def lstm_forward_loop(pre: np.ndarray, wh: np.ndarray, h_out: np.ndarray, c_out: np.ndarray) -> None:
    """Run the recurrent loop over pre-activations.

    pre: (T, B, 4H) input projections x@Wx + b; overwritten in place with the
    activated gate values.  h_out/c_out: (T, B, H) filled with the hidden and
    cell states.  Initial states are zero.
    """
    T, B, H4 = pre.shape
    H = H4 // 4
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    for t in range(T):
        g = pre[t]
        g += h @ wh
        i = _sigmoid(g[:, :H])
        f = _sigmoid(g[:, H:2 * H])
        cand = np.tanh(g[:, 2 * H:3 * H])
        o = _sigmoid(g[:, 3 * H:])
        c = f * c + i * cand
        h = o * np.tanh(c)
        g[:, :H] = i
        g[:, H:2 * H] = f
        g[:, 2 * H:3 * H] = cand
        g[:, 3 * H:] = o
        h_out[t] = h
        c_out[t] = c


def lstm_backward_loop(
    gates: np.ndarray,
    c_all: np.ndarray,
    wh_t: np.ndarray,
    dh_up: np.ndarray,
    da_out: np.ndarray,
) -> None:
    """Backpropagate through the recurrent loop.

    gates: (T, B, 4H) activated gate values from the forward pass.
    c_all: (T, B, H) cell states.  wh_t: (4H, H) transposed recurrent weights.
    dh_up: (T, B, H) upstream gradient per timestep.  da_out: (T, B, 4H)
    filled with gradients w.r.t. the gate pre-activations.
    """
    T, B, H4 = gates.shape
    H = H4 // 4
    dh = np.zeros((B, H))
    dc = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        dh = dh + dh_up[t]
        i = gates[t, :, :H]
        f = gates[t, :, H:2 * H]
        cand = gates[t, :, 2 * H:3 * H]
        o = gates[t, :, 3 * H:]
        c_prev = c_all[t - 1] if t > 0 else np.zeros((B, H))
        tc = np.tanh(c_all[t])
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        da = da_out[t]
        da[:, :H] = dc * cand * i * (1.0 - i)
        da[:, H:2 * H] = dc * c_prev * f * (1.0 - f)
        da[:, 2 * H:3 * H] = dc * i * (1.0 - cand * cand)
        da[:, 3 * H:] = do * o * (1.0 - o)
        dh = da @ wh_t
        dc = dc * f

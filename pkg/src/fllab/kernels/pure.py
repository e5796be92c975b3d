"""Numpy implementations of the hot kernels.

These are the reference semantics; the compiled extension in `_core.pyx`
mirrors them exactly and is preferred at import time when available.
All batch routines take integer token matrices (N, L) with per-row lengths
and process column-by-column so memory stays linear in the batch size.
"""

from __future__ import annotations

import numpy as np


def shuffle_accept_batch(values, k, tokens, lengths):
    """Uniform-attention Shuffle-k acceptance over integer prefix sums.

    `values` is the per-symbol value-vector table (n_symbols, 2k); a word is
    accepted iff no odd coordinate of the running sum ever goes positive and
    the final sum is componentwise <= 0 (i.e. every ReLU output is zero).
    """
    n, max_len = tokens.shape
    cum = np.zeros((n, values.shape[1]), dtype=np.int64)
    ok = np.ones(n, dtype=bool)
    odd = np.arange(1, 2 * k, 2)
    for t in range(max_len):
        active = t < lengths
        cum += values[tokens[:, t]] * active[:, None]
        bad = (cum[:, odd] > 0).any(axis=1)
        ok &= ~(active & bad)
    ok &= ~(cum > 0).any(axis=1)
    return ok.astype(np.uint8)


def boolexp_accept_batch(weights, tokens, lengths):
    """Prefix-expression acceptance from per-symbol counter weights.

    Tracks the owed-operand count c (start value 1): c must stay strictly
    positive before the final symbol and land exactly on 0 at the end.
    """
    n, max_len = tokens.shape
    c = np.ones(n, dtype=np.int64)
    ok = lengths > 0
    for t in range(max_len):
        active = t < lengths
        c += weights[tokens[:, t]] * active
        interior = active & (t < lengths - 1)
        ok &= ~(interior & (c <= 0))
    ok &= c == 0
    return ok.astype(np.uint8)


def rcl_accept_batch(increments, sym_state, accept_table, start_state, tokens, lengths):
    """Stateless counter machine acceptance: final (state, zero-mask) lookup."""
    n, max_len = tokens.shape
    k = increments.shape[1]
    counters = np.zeros((n, k), dtype=np.int64)
    state = np.full(n, start_state, dtype=np.int64)
    for t in range(max_len):
        active = t < lengths
        sym = tokens[:, t]
        counters += increments[sym] * active[:, None]
        state = np.where(active, sym_state[sym], state)
    bits = ((counters != 0) << np.arange(k)).sum(axis=1)
    return accept_table[state, bits].astype(np.uint8)


def cm_accept_batch(tables, tokens, lengths):
    """Batch simulation of a general counter machine from dense tables.

    `tables` is (transition, add, reset, accept, start) as produced by
    `fllab.kernels.encode_counter_machine`.
    """
    trans, add, reset, accept, start = tables
    n, max_len = tokens.shape
    k = add.shape[3]
    powers = 1 << np.arange(k)
    counters = np.zeros((n, k), dtype=np.int64)
    state = np.full(n, start, dtype=np.int64)
    for t in range(max_len):
        active = t < lengths
        sym = tokens[:, t]
        bits = ((counters != 0) * powers).sum(axis=1)
        nxt = trans[sym, state, bits]
        delta = add[sym, state, bits]
        rst = reset[sym, state, bits].astype(bool)
        counters = np.where(rst & active[:, None], 0, counters + delta * active[:, None])
        state = np.where(active, nxt, state)
    bits = ((counters != 0) * powers).sum(axis=1)
    return accept[state, bits].astype(np.uint8)


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def lstm_forward_core(xproj, wh):
    """LSTM recurrence given precomputed input projections.

    xproj: (T, B, 4H) = x @ Wx + b with gate order [i, f, g, o];
    returns (h_seq, cache) where cache = (i, f, g, o, c, hc) arrays (T, B, H).
    """
    t_len, batch, four_h = xproj.shape
    hidden = four_h // 4
    h_seq = np.zeros((t_len, batch, hidden))
    gi = np.zeros((t_len, batch, hidden))
    gf = np.zeros((t_len, batch, hidden))
    gg = np.zeros((t_len, batch, hidden))
    go = np.zeros((t_len, batch, hidden))
    cs = np.zeros((t_len, batch, hidden))
    hc = np.zeros((t_len, batch, hidden))
    h_prev = np.zeros((batch, hidden))
    c_prev = np.zeros((batch, hidden))
    for t in range(t_len):
        z = xproj[t] + h_prev @ wh
        gi[t] = _sigmoid(z[:, :hidden])
        gf[t] = _sigmoid(z[:, hidden : 2 * hidden])
        gg[t] = np.tanh(z[:, 2 * hidden : 3 * hidden])
        go[t] = _sigmoid(z[:, 3 * hidden :])
        cs[t] = gf[t] * c_prev + gi[t] * gg[t]
        hc[t] = np.tanh(cs[t])
        h_seq[t] = go[t] * hc[t]
        h_prev = h_seq[t]
        c_prev = cs[t]
    return h_seq, (gi, gf, gg, go, cs, hc)


def lstm_backward_core(wh, cache, dh_out):
    """Gradient of the recurrence w.r.t. the input projections.

    Returns dxproj (T, B, 4H); weight gradients follow from dxproj and the
    cached hidden states outside this kernel.
    """
    gi, gf, gg, go, cs, hc = cache
    t_len, batch, hidden = gi.shape
    dxproj = np.zeros((t_len, batch, 4 * hidden))
    wh_t = wh.T
    dh_next = np.zeros((batch, hidden))
    dc_next = np.zeros((batch, hidden))
    for t in range(t_len - 1, -1, -1):
        dh = dh_out[t] + dh_next
        do = dh * hc[t]
        dc = dc_next + dh * go[t] * (1.0 - hc[t] * hc[t])
        di = dc * gg[t]
        dg = dc * gi[t]
        c_prev = cs[t - 1] if t > 0 else 0.0
        df = dc * c_prev
        dc_next = dc * gf[t]
        dz = dxproj[t]
        dz[:, :hidden] = di * gi[t] * (1.0 - gi[t])
        dz[:, hidden : 2 * hidden] = df * gf[t] * (1.0 - gf[t])
        dz[:, 2 * hidden : 3 * hidden] = dg * (1.0 - gg[t] * gg[t])
        dz[:, 3 * hidden :] = do * go[t] * (1.0 - go[t])
        dh_next = dz @ wh_t
    return dxproj

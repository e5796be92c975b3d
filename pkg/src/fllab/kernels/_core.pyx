# Compiled mirrors of fllab.kernels.pure.  Semantics are defined there; this
# module only removes interpreter overhead from the per-step loops.

import numpy as np

from libc.math cimport exp, tanh
from scipy.linalg.cython_blas cimport dgemm


def shuffle_accept_batch(long long[:, ::1] values, int k, long long[:, ::1] tokens,
                         long long[::1] lengths):
    cdef Py_ssize_t n = tokens.shape[0]
    cdef Py_ssize_t d = values.shape[1]
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef long long cum[64]
    cdef Py_ssize_t i, t, j, L
    cdef int ok
    cdef long long sym
    for i in range(n):
        L = lengths[i]
        ok = 1
        for j in range(d):
            cum[j] = 0
        for t in range(L):
            sym = tokens[i, t]
            for j in range(d):
                cum[j] += values[sym, j]
            for j in range(k):
                if cum[2 * j + 1] > 0:
                    ok = 0
                    break
            if not ok:
                break
        if ok:
            for j in range(d):
                if cum[j] > 0:
                    ok = 0
                    break
        out[i] = ok
    return out_arr


def boolexp_accept_batch(long long[::1] weights, long long[:, ::1] tokens,
                         long long[::1] lengths):
    cdef Py_ssize_t n = tokens.shape[0]
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef Py_ssize_t i, t, L
    cdef long long c
    cdef int ok
    for i in range(n):
        L = lengths[i]
        if L == 0:
            out[i] = 0
            continue
        c = 1
        ok = 1
        for t in range(L):
            c += weights[tokens[i, t]]
            if t < L - 1 and c <= 0:
                ok = 0
                break
        out[i] = ok and c == 0
    return out_arr


def rcl_accept_batch(long long[:, ::1] increments, long long[::1] sym_state,
                     unsigned char[:, ::1] accept_table, long long start_state,
                     long long[:, ::1] tokens, long long[::1] lengths):
    cdef Py_ssize_t n = tokens.shape[0]
    cdef Py_ssize_t k = increments.shape[1]
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef long long counters[8]
    cdef Py_ssize_t i, t, j, L
    cdef long long sym, state, bits
    for i in range(n):
        L = lengths[i]
        state = start_state
        for j in range(k):
            counters[j] = 0
        for t in range(L):
            sym = tokens[i, t]
            for j in range(k):
                counters[j] += increments[sym, j]
            state = sym_state[sym]
        bits = 0
        for j in range(k):
            if counters[j] != 0:
                bits |= 1 << j
        out[i] = accept_table[state, bits]
    return out_arr


def cm_accept_batch(tables, long long[:, ::1] tokens, long long[::1] lengths):
    trans_arr, add_arr, reset_arr, accept_arr, start = tables
    cdef long long[:, :, ::1] trans = trans_arr
    cdef long long[:, :, :, ::1] add = add_arr
    cdef unsigned char[:, :, :, ::1] reset = reset_arr
    cdef unsigned char[:, ::1] accept = accept_arr
    cdef long long start_state = start
    cdef Py_ssize_t n = tokens.shape[0]
    cdef Py_ssize_t k = add.shape[3]
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef long long counters[8]
    cdef Py_ssize_t i, t, j, L
    cdef long long sym, state, bits
    for i in range(n):
        L = lengths[i]
        state = start_state
        for j in range(k):
            counters[j] = 0
        for t in range(L):
            sym = tokens[i, t]
            bits = 0
            for j in range(k):
                if counters[j] != 0:
                    bits |= 1 << j
            for j in range(k):
                if reset[sym, state, bits, j]:
                    counters[j] = 0
                else:
                    counters[j] += add[sym, state, bits, j]
            state = trans[sym, state, bits]
        bits = 0
        for j in range(k):
            if counters[j] != 0:
                bits |= 1 << j
        out[i] = accept[state, bits]
    return out_arr


cdef inline double sigmoid(double x) noexcept nogil:
    cdef double e
    if x >= 0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef void _matmul(double[:, ::1] a, double[:, ::1] b, double[:, ::1] c, double beta) noexcept nogil:
    # c = a @ b + beta * c for C-contiguous operands (column-major dgemm trick)
    cdef int m = <int> a.shape[0]
    cdef int k = <int> a.shape[1]
    cdef int n = <int> b.shape[1]
    cdef double alpha = 1.0
    dgemm("N", "N", &n, &m, &k, &alpha, &b[0, 0], &n, &a[0, 0], &k, &beta, &c[0, 0], &n)


def lstm_forward_core(double[:, :, ::1] xproj, wh_arr):
    cdef Py_ssize_t t_len = xproj.shape[0]
    cdef Py_ssize_t batch = xproj.shape[1]
    cdef Py_ssize_t hidden = xproj.shape[2] // 4
    wh_c = np.ascontiguousarray(wh_arr)
    cdef double[:, ::1] wh = wh_c

    h_seq_arr = np.zeros((t_len, batch, hidden))
    gi_arr = np.zeros((t_len, batch, hidden))
    gf_arr = np.zeros((t_len, batch, hidden))
    gg_arr = np.zeros((t_len, batch, hidden))
    go_arr = np.zeros((t_len, batch, hidden))
    cs_arr = np.zeros((t_len, batch, hidden))
    hc_arr = np.zeros((t_len, batch, hidden))
    z_arr = np.zeros((batch, 4 * hidden))
    cdef double[:, :, ::1] h_seq = h_seq_arr
    cdef double[:, :, ::1] gi = gi_arr, gf = gf_arr, gg = gg_arr, go = go_arr
    cdef double[:, :, ::1] cs = cs_arr, hc = hc_arr
    cdef double[:, ::1] z = z_arr
    cdef Py_ssize_t t, b, j
    cdef double iv, fv, gv, ov, cv, cprev

    with nogil:
        for t in range(t_len):
            for b in range(batch):
                for j in range(4 * hidden):
                    z[b, j] = xproj[t, b, j]
            if t > 0:
                _matmul(h_seq[t - 1], wh, z, 1.0)
            for b in range(batch):
                for j in range(hidden):
                    iv = sigmoid(z[b, j])
                    fv = sigmoid(z[b, hidden + j])
                    gv = tanh(z[b, 2 * hidden + j])
                    ov = sigmoid(z[b, 3 * hidden + j])
                    cprev = cs[t - 1, b, j] if t > 0 else 0.0
                    cv = fv * cprev + iv * gv
                    gi[t, b, j] = iv
                    gf[t, b, j] = fv
                    gg[t, b, j] = gv
                    go[t, b, j] = ov
                    cs[t, b, j] = cv
                    hc[t, b, j] = tanh(cv)
                    h_seq[t, b, j] = ov * hc[t, b, j]
    return h_seq_arr, (gi_arr, gf_arr, gg_arr, go_arr, cs_arr, hc_arr)


def lstm_backward_core(wh_arr, cache, double[:, :, ::1] dh_out):
    gi_arr, gf_arr, gg_arr, go_arr, cs_arr, hc_arr = cache
    cdef double[:, :, ::1] gi = gi_arr, gf = gf_arr, gg = gg_arr, go = go_arr
    cdef double[:, :, ::1] cs = cs_arr, hc = hc_arr
    cdef Py_ssize_t t_len = gi.shape[0]
    cdef Py_ssize_t batch = gi.shape[1]
    cdef Py_ssize_t hidden = gi.shape[2]
    wh_t_c = np.ascontiguousarray(np.asarray(wh_arr).T)
    cdef double[:, ::1] wh_t = wh_t_c

    dxproj_arr = np.zeros((t_len, batch, 4 * hidden))
    dh_next_arr = np.zeros((batch, hidden))
    dc_next_arr = np.zeros((batch, hidden))
    cdef double[:, :, ::1] dxproj = dxproj_arr
    cdef double[:, ::1] dh_next = dh_next_arr
    cdef double[:, ::1] dc_next = dc_next_arr
    cdef Py_ssize_t t, b, j
    cdef double dh, do, dc, di, dg, df, cprev, iv, fv, gv, ov, hcv

    with nogil:
        for t in range(t_len - 1, -1, -1):
            for b in range(batch):
                for j in range(hidden):
                    iv = gi[t, b, j]
                    fv = gf[t, b, j]
                    gv = gg[t, b, j]
                    ov = go[t, b, j]
                    hcv = hc[t, b, j]
                    dh = dh_out[t, b, j] + dh_next[b, j]
                    do = dh * hcv
                    dc = dc_next[b, j] + dh * ov * (1.0 - hcv * hcv)
                    di = dc * gv
                    dg = dc * iv
                    cprev = cs[t - 1, b, j] if t > 0 else 0.0
                    df = dc * cprev
                    dc_next[b, j] = dc * fv
                    dxproj[t, b, j] = di * iv * (1.0 - iv)
                    dxproj[t, b, hidden + j] = df * fv * (1.0 - fv)
                    dxproj[t, b, 2 * hidden + j] = dg * (1.0 - gv * gv)
                    dxproj[t, b, 3 * hidden + j] = do * ov * (1.0 - ov)
            _matmul(dxproj[t], wh_t, dh_next, 0.0)
    return dxproj_arr

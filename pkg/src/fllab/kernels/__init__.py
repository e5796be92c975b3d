"""Hot-kernel backend selection and counter-machine table encoding.

At import the compiled extension is preferred; set FLLAB_PURE=1 to force the
numpy fallback.  Both backends implement identical semantics (see pure.py),
which the test suite asserts directly.
"""

from __future__ import annotations

import importlib
import os

import numpy as np

from . import pure

_core = None
if os.environ.get("FLLAB_PURE", "") != "1":
    try:
        _core = importlib.import_module("fllab.kernels._core")
    except ImportError:
        _core = None

BACKEND = "compiled" if _core is not None else "pure"
_impl = _core if _core is not None else pure


def backend_module(name=None):
    """Return a kernel module by name ("compiled"/"pure"/None for active)."""
    if name is None:
        return _impl
    if name == "pure":
        return pure
    if name == "compiled":
        if _core is None:
            raise RuntimeError("compiled kernels are not available")
        return _core
    raise ValueError(f"unknown backend {name!r}")


def _tok(tokens, lengths):
    return (
        np.ascontiguousarray(tokens, dtype=np.int64),
        np.ascontiguousarray(lengths, dtype=np.int64),
    )


def shuffle_accept_batch(values, k, tokens, lengths, backend=None):
    tokens, lengths = _tok(tokens, lengths)
    values = np.ascontiguousarray(values, dtype=np.int64)
    return backend_module(backend).shuffle_accept_batch(values, k, tokens, lengths)


def boolexp_accept_batch(weights, tokens, lengths, backend=None):
    tokens, lengths = _tok(tokens, lengths)
    weights = np.ascontiguousarray(weights, dtype=np.int64)
    return backend_module(backend).boolexp_accept_batch(weights, tokens, lengths)


def rcl_accept_batch(increments, sym_state, accept_table, start_state, tokens, lengths, backend=None):
    tokens, lengths = _tok(tokens, lengths)
    increments = np.ascontiguousarray(increments, dtype=np.int64)
    sym_state = np.ascontiguousarray(sym_state, dtype=np.int64)
    accept_table = np.ascontiguousarray(accept_table, dtype=np.uint8)
    return backend_module(backend).rcl_accept_batch(
        increments, sym_state, accept_table, int(start_state), tokens, lengths
    )


def encode_counter_machine(machine):
    """Dense integer tables for batch simulation of a CounterMachine.

    Returns (transition, add, reset, accept, start_index); symbol order is
    machine.alphabet, state order is sorted by repr, mask index packs bit j
    of the zero-mask into 2**j.
    """
    from ..machines import RESET

    symbols = list(machine.alphabet)
    states = sorted(machine.states, key=repr)
    state_index = {q: i for i, q in enumerate(states)}
    k = machine.k
    n_masks = 2**k
    trans = np.zeros((len(symbols), len(states), n_masks), dtype=np.int64)
    add = np.zeros((len(symbols), len(states), n_masks, max(k, 1)), dtype=np.int64)
    reset = np.zeros((len(symbols), len(states), n_masks, max(k, 1)), dtype=np.uint8)
    accept = np.zeros((len(states), n_masks), dtype=np.uint8)

    def mask_tuple(bits):
        return tuple((bits >> j) & 1 for j in range(k))

    for si, sym in enumerate(symbols):
        for qi, q in enumerate(states):
            for bits in range(n_masks):
                mask = mask_tuple(bits)
                trans[si, qi, bits] = state_index[machine._transition[sym, q, mask]]
                for j, op in enumerate(machine._update[sym, q, mask]):
                    if op == RESET:
                        reset[si, qi, bits, j] = 1
                    else:
                        add[si, qi, bits, j] = op
    for q, mask in machine.accept_mask:
        bits = sum(b << j for j, b in enumerate(mask))
        accept[state_index[q], bits] = 1
    return trans, add, reset, accept, state_index[machine.start]


def cm_accept_batch(machine, tokens, lengths, backend=None):
    """Batch acceptance for a CounterMachine over tokenized words."""
    tables = getattr(machine, "_kernel_tables", None)
    if tables is None:
        tables = machine._kernel_tables = encode_counter_machine(machine)
    tokens, lengths = _tok(tokens, lengths)
    return backend_module(backend).cm_accept_batch(tables, tokens, lengths)


def lstm_forward_core(xproj, wh, backend=None):
    xproj = np.ascontiguousarray(xproj, dtype=np.float64)
    wh = np.ascontiguousarray(wh, dtype=np.float64)
    return backend_module(backend).lstm_forward_core(xproj, wh)


def lstm_backward_core(wh, cache, dh_out, backend=None):
    wh = np.ascontiguousarray(wh, dtype=np.float64)
    dh_out = np.ascontiguousarray(dh_out, dtype=np.float64)
    return backend_module(backend).lstm_backward_core(wh, cache, dh_out)

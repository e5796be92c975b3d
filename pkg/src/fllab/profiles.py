"""Hyperparameter spaces: the full grid and curated desk-scale budgets.

The full transformer grid follows the tuning table (hidden sizes 3..32,
1-4 heads, 1-2 layers, learning rates 1e-2/1e-3, absolute/relative/masking
schemes; 4 heads are not allowed at hidden size 3), about 160 configurations;
the LSTM grid has 40.  The budget lists are small subsets, ordered with the
historically strong configurations first so early stopping pays off.
"""

from __future__ import annotations

TRANSFORMER_HIDDEN = (3, 4, 8, 16, 32)
HEADS = (1, 2, 4)
LAYERS = (1, 2)
LEARNING_RATES = (1e-2, 1e-3)
SCHEMES = ("absolute", "relative", "masking")
LSTM_HIDDEN = (3, 4, 6, 8, 12, 16, 20, 24, 28, 32)


def _tcfg(d, h, l, scheme, lr, **kw):
    return {"kind": "transformer", "d_model": d, "heads": h, "layers": l,
            "scheme": scheme, "lr": lr, **kw}


def _lcfg(hidden, layers, lr):
    return {"kind": "lstm", "hidden": hidden, "layers": layers, "lr": lr}


def full_transformer_space(schemes=SCHEMES):
    space = []
    for scheme in schemes:
        for d in TRANSFORMER_HIDDEN:
            for h in HEADS:
                if d % h:
                    continue
                for l in LAYERS:
                    for lr in LEARNING_RATES:
                        space.append(_tcfg(d, h, l, scheme, lr))
    return space


def full_lstm_space():
    return [
        _lcfg(hidden, layers, lr)
        for hidden in LSTM_HIDDEN
        for layers in (1, 2)
        for lr in LEARNING_RATES
    ]


def budget_masking_space():
    """Masking-only transformers, strongest shapes first (counter languages)."""
    return [
        _tcfg(16, 1, 1, "masking", 1e-2),
        _tcfg(8, 1, 1, "masking", 1e-2),
        _tcfg(32, 2, 1, "masking", 1e-2),
        _tcfg(16, 2, 2, "masking", 1e-2),
        _tcfg(16, 1, 1, "masking", 1e-3),
        _tcfg(8, 2, 2, "masking", 1e-2),
        _tcfg(32, 1, 2, "masking", 1e-3),
        _tcfg(4, 1, 1, "masking", 1e-2),
    ]


def budget_scheme_space(scheme, residual=True):
    """Per-scheme transformer budget (positional-encoding ablations)."""
    shapes = [
        (16, 2, 2, 1e-3, True),
        (16, 1, 1, 1e-2, False),
        (16, 2, 2, 1e-2, True),
        (8, 1, 1, 1e-2, True),
        (16, 1, 1, 1e-3, True),
        (32, 2, 2, 1e-3, True),
    ]
    return [
        _tcfg(d, h, l, scheme, lr, residual=residual, layer_norm=ln)
        for d, h, l, lr, ln in shapes
    ]


def budget_lstm_space():
    return [
        _lcfg(16, 1, 1e-2),
        _lcfg(8, 1, 1e-2),
        _lcfg(32, 1, 1e-2),
        _lcfg(16, 2, 1e-2),
        _lcfg(16, 1, 1e-3),
        _lcfg(4, 1, 1e-2),
    ]


def default_budget_space(kind="transformer"):
    """The documented ~20-configuration desk-scale default."""
    if kind == "lstm":
        return budget_lstm_space()
    space = budget_masking_space()
    for scheme in ("absolute", "relative"):
        space += budget_scheme_space(scheme)[:6]
    return space

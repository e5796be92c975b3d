"""Trainable transformer encoder and LSTM for character prediction.

Both models map a token sequence to per-step sigmoid probabilities over the
alphabet plus an end-of-sequence coordinate; step t conditions only on the
prefix up to t (causal masking / recurrence).  Five positional schemes are
supported for the transformer: masking (no explicit encoding), absolute
sinusoidal, cos(n*pi), a trainable table, and learned relative-offset logit
biases.  Positions are 1-based.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import tape
from .tape import Tensor

SCHEMES = ("masking", "absolute", "relative", "cos", "trainable")


@dataclass(frozen=True)
class TransformerConfig:
    vocab: tuple
    d_model: int = 16
    heads: int = 1
    layers: int = 1
    ffn_width: int = 0  # 0 -> 4 * d_model
    scheme: str = "masking"
    residual: bool = True
    layer_norm: bool = True
    max_len: int = 600  # trainable-table capacity
    rel_window: int = 64

    def __post_init__(self):
        if not 1 <= self.layers <= 4:
            raise ValueError("layers must be in [1, 4]")
        if not 1 <= self.heads <= 4:
            raise ValueError("heads must be in [1, 4]")
        if not 2 <= self.d_model <= 32:
            raise ValueError("d_model must be in [2, 32]")
        if self.d_model % self.heads:
            raise ValueError("d_model must be divisible by heads")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")

    @property
    def width(self):
        return self.ffn_width or 4 * self.d_model

    @property
    def out_dim(self):
        return len(self.vocab) + 1


@dataclass(frozen=True)
class LstmConfig:
    vocab: tuple
    hidden: int = 16
    layers: int = 1
    scheme: str = field(default="recurrent", init=False)  # for uniform reporting

    def __post_init__(self):
        if not 2 <= self.hidden <= 32:
            raise ValueError("hidden must be in [2, 32]")
        if not 1 <= self.layers <= 2:
            raise ValueError("layers must be in [1, 2]")

    @property
    def out_dim(self):
        return len(self.vocab) + 1


def _uniform(rng, shape, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def sinusoidal_table(max_len, d_model):
    """Standard interleaved sin/cos encodings for 1-based positions."""
    pos = np.arange(1, max_len + 1, dtype=np.float64)[:, None]
    out = np.zeros((max_len, d_model))
    for i in range(0, d_model, 2):
        wavelength = 10000.0 ** (i / d_model)
        out[:, i] = np.sin(pos[:, 0] / wavelength)
        if i + 1 < d_model:
            out[:, i + 1] = np.cos(pos[:, 0] / wavelength)
    return out


def positional_signal(scheme, position, d_model, table=None):
    """The additive position vector for a single 1-based position.

    The relative scheme has no additive vector (it biases attention logits
    per offset) and raises if queried here.
    """
    if position < 1:
        raise ValueError("positions are 1-based")
    if scheme == "masking":
        return np.zeros(d_model)
    if scheme == "cos":
        return np.full(d_model, np.cos(position * np.pi))
    if scheme == "absolute":
        return sinusoidal_table(position, d_model)[-1]
    if scheme == "trainable":
        if table is None or position > table.shape[0]:
            raise ValueError(f"position {position} outside trainable table")
        return np.asarray(table[position - 1], dtype=np.float64)
    if scheme == "relative":
        raise ValueError("relative scheme has no additive positional vector")
    raise ValueError(f"unknown scheme {scheme!r}")


def predict_legal(probabilities):
    """Threshold a probability row at a strict 0.5 (ties predict 0)."""
    return (np.asarray(probabilities) > 0.5).astype(np.uint8)


class _ModelBase:
    def __init__(self, config, seed):
        self.config = config
        self.seed = seed
        self.params = {}
        self._sym_index = {s: i for i, s in enumerate(config.vocab)}

    def tokenize(self, word):
        try:
            return np.array([self._sym_index[s] for s in word], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"symbol {exc.args[0]!r} not in model vocab") from None

    def parameters(self):
        return self.params

    def num_parameters(self):
        return sum(int(np.prod(t.data.shape)) for t in self.params.values())

    def predict_probs_batch(self, tokens, lengths):
        """Forward pass without gradient bookkeeping; returns (B, T, C)."""
        return self.forward_tokens(tokens, lengths).data

    def step_outputs(self, word):
        tokens = self.tokenize(word)[None, :]
        lengths = np.array([len(word)])
        return self.predict_probs_batch(tokens, lengths)[0]

    def _param(self, name, array):
        t = Tensor(np.asarray(array, dtype=np.float64))
        self.params[name] = t
        return t

    def save(self, path):
        meta = {"kind": self.kind, "seed": self.seed, "config": _config_dict(self.config)}
        arrays = {name: t.data for name, t in self.params.items()}
        np.savez(path, __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)

    @staticmethod
    def load(path):
        with np.load(path) as blob:
            meta = json.loads(bytes(blob["__meta__"]).decode())
            arrays = {k: blob[k] for k in blob.files if k != "__meta__"}
        config = _config_from_dict(meta["kind"], meta["config"])
        model = (TransformerModel if meta["kind"] == "transformer" else LstmModel)(
            config, seed=meta["seed"]
        )
        for name, arr in arrays.items():
            if name not in model.params or model.params[name].data.shape != arr.shape:
                raise ValueError(f"checkpoint tensor {name!r} does not match the config")
            model.params[name].data[...] = arr
        return model


def _config_dict(config):
    d = {k: getattr(config, k) for k in config.__dataclass_fields__ if k != "scheme" or True}
    d = {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}
    return d


def _config_from_dict(kind, d):
    d = dict(d)
    d["vocab"] = tuple(d["vocab"])
    if kind == "transformer":
        return TransformerConfig(**d)
    d.pop("scheme", None)
    return LstmConfig(**d)


class TransformerModel(_ModelBase):
    kind = "transformer"

    def __init__(self, config, seed=0):
        super().__init__(config, seed)
        rng = np.random.default_rng(seed)
        d = config.d_model
        self._param("embed", _uniform(rng, (len(config.vocab), d), d))
        if config.scheme == "trainable":
            self._param("pos_table", _uniform(rng, (config.max_len, d), d))
        for l in range(config.layers):
            for name in ("wq", "wk", "wv", "wo"):
                self._param(f"l{l}.{name}", _uniform(rng, (d, d), d))
                self._param(f"l{l}.b{name[1]}", np.zeros(d))
            if config.scheme == "relative":
                self._param(f"l{l}.rel", _uniform(rng, (config.heads, config.rel_window), d))
            self._param(f"l{l}.ffn_w1", _uniform(rng, (d, config.width), d))
            self._param(f"l{l}.ffn_b1", np.zeros(config.width))
            self._param(f"l{l}.ffn_w2", _uniform(rng, (config.width, d), config.width))
            self._param(f"l{l}.ffn_b2", np.zeros(d))
            if config.layer_norm:
                self._param(f"l{l}.ln1_g", np.ones(d))
                self._param(f"l{l}.ln1_b", np.zeros(d))
                self._param(f"l{l}.ln2_g", np.ones(d))
                self._param(f"l{l}.ln2_b", np.zeros(d))
        self._param("out_w", _uniform(rng, (d, config.out_dim), d))
        self._param("out_b", np.zeros(config.out_dim))

    def _positional(self, t_len):
        cfg = self.config
        if cfg.scheme == "absolute":
            return sinusoidal_table(t_len, cfg.d_model)
        if cfg.scheme == "cos":
            pos = np.arange(1, t_len + 1)
            return np.repeat(np.cos(pos * np.pi)[:, None], cfg.d_model, axis=1)
        return None

    def forward_tokens(self, tokens, lengths=None, collect=None):
        """Probability rows (B, T, C); `collect` captures internals by name."""
        cfg = self.config
        tokens = np.asarray(tokens, dtype=np.int64)
        batch, t_len = tokens.shape
        x = tape.embedding(self.params["embed"], tokens)
        if cfg.scheme == "trainable":
            x = x + tape.take_rows(self.params["pos_table"], t_len)
        else:
            pos = self._positional(t_len)
            if pos is not None:
                x = x + pos
        causal = np.tril(np.ones((t_len, t_len), dtype=bool))
        dh = cfg.d_model // cfg.heads
        scale = 1.0 / np.sqrt(dh)
        for l in range(cfg.layers):
            q = self._heads(x @ self.params[f"l{l}.wq"] + self.params[f"l{l}.bq"], batch, t_len)
            k = self._heads(x @ self.params[f"l{l}.wk"] + self.params[f"l{l}.bk"], batch, t_len)
            v = self._heads(x @ self.params[f"l{l}.wv"] + self.params[f"l{l}.bv"], batch, t_len)
            scores = tape.mul(q @ tape.transpose(k, (0, 1, 3, 2)), scale)
            if cfg.scheme == "relative":
                scores = scores + tape.rel_bias(self.params[f"l{l}.rel"], t_len)
            weights = tape.masked_softmax(scores, causal)
            mixed = weights @ v  # (B, H, T, dh)
            merged = tape.reshape(
                tape.transpose(mixed, (0, 2, 1, 3)), (batch, t_len, cfg.d_model)
            )
            attn_out = merged @ self.params[f"l{l}.wo"] + self.params[f"l{l}.bo"]
            if collect is not None:
                collect[f"l{l}.q"] = q.data.copy()
                collect[f"l{l}.k"] = k.data.copy()
                collect[f"l{l}.v"] = v.data.copy()
                collect[f"l{l}.weights"] = weights.data.copy()
                collect[f"l{l}.attn_out"] = attn_out.data.copy()
            h = x + attn_out if cfg.residual else attn_out
            if cfg.layer_norm:
                h = tape.layer_norm(h, self.params[f"l{l}.ln1_g"], self.params[f"l{l}.ln1_b"])
            ffn = (
                tape.relu(h @ self.params[f"l{l}.ffn_w1"] + self.params[f"l{l}.ffn_b1"])
                @ self.params[f"l{l}.ffn_w2"]
                + self.params[f"l{l}.ffn_b2"]
            )
            h2 = h + ffn if cfg.residual else ffn
            if cfg.layer_norm:
                h2 = tape.layer_norm(h2, self.params[f"l{l}.ln2_g"], self.params[f"l{l}.ln2_b"])
            x = h2
        return tape.sigmoid(x @ self.params["out_w"] + self.params["out_b"])

    def _heads(self, t, batch, t_len):
        cfg = self.config
        return tape.transpose(
            tape.reshape(t, (batch, t_len, cfg.heads, cfg.d_model // cfg.heads)), (0, 2, 1, 3)
        )

    def attention_internals(self, word, layer=0):
        """(q, k, v) arrays of shape (heads, T, d_head) for one word."""
        collect = {}
        tokens = self.tokenize(word)[None, :]
        self.forward_tokens(tokens, collect=collect)
        return (
            collect[f"l{layer}.q"][0],
            collect[f"l{layer}.k"][0],
            collect[f"l{layer}.v"][0],
        )


class LstmModel(_ModelBase):
    kind = "lstm"

    def __init__(self, config, seed=0):
        super().__init__(config, seed)
        rng = np.random.default_rng(seed)
        h = config.hidden
        self._param("embed", _uniform(rng, (len(config.vocab), h), h))
        din = h
        for l in range(config.layers):
            self._param(f"l{l}.wx", _uniform(rng, (din, 4 * h), din))
            self._param(f"l{l}.wh", _uniform(rng, (h, 4 * h), h))
            self._param(f"l{l}.b", np.zeros(4 * h))
            din = h
        self._param("out_w", _uniform(rng, (h, config.out_dim), h))
        self._param("out_b", np.zeros(config.out_dim))

    def forward_tokens(self, tokens, lengths=None, collect=None):
        tokens = np.asarray(tokens, dtype=np.int64)
        x = tape.embedding(self.params["embed"], tokens)
        for l in range(self.config.layers):
            x = tape.lstm_seq(
                x, self.params[f"l{l}.wx"], self.params[f"l{l}.wh"], self.params[f"l{l}.b"]
            )
        return tape.sigmoid(x @ self.params["out_w"] + self.params["out_b"])


def make_model(config, seed=0):
    if isinstance(config, TransformerConfig):
        return TransformerModel(config, seed)
    if isinstance(config, LstmConfig):
        return LstmModel(config, seed)
    raise TypeError(f"unknown config type {type(config)!r}")

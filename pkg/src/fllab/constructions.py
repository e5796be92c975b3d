"""Hand-assigned transformer weights realizing the expressiveness results.

Three constructions share a skeleton: integer symbol embeddings, null key
map (hence exactly uniform causal attention), identity or integer-matrix
query/value maps, a ReLU feed-forward stage, and a per-construction acceptor
predicate over the trace of post-FFN outputs.  With a null key map the
attention average at step i is a rational vector with denominator i, so the
default evaluation mode is exact: integer numerators over the step index.

Also here: executable consequences of the two impossibility arguments
(constant outputs of masking-only models on unary input, and the reset-symbol
key/value invariance of single-layer models).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .catalog import DYCK_PAIRS, LanguageSpec
from .machines import StatelessCounterMachine, zero_mask


class ConstructionError(Exception):
    """Unknown symbol or unsupported model handed to a construction op."""


class PreconditionError(Exception):
    """A check was invoked on a model that violates its premises."""


@dataclass
class TraceStep:
    attention: tuple  # uniform row over the causal prefix
    a: tuple  # attention output (post value-average, incl. residual if on)
    z: tuple  # post-FFN output


@dataclass
class Trace:
    steps: list

    def attention_rows(self):
        return [s.attention for s in self.steps]

    def a_values(self):
        return [s.a for s in self.steps]

    def z_values(self):
        return [s.z for s in self.steps]


class HandTransformer:
    """Explicit weight bundle: embeddings, Q/K/V maps, FFN, and acceptor.

    `k_map` must be None (the null matrix): all three paper constructions
    rely on it, and it is what makes exact evaluation possible.
    """

    def __init__(
        self,
        symbols,
        embed,
        v_map,
        ffn_w,
        ffn_b=None,
        q_map=None,
        k_map=None,
        residual=False,
        start_embedding=None,
        acceptor=None,
        name="",
    ):
        if k_map is not None:
            raise ConstructionError("only the null key map (uniform attention) is supported")
        self.symbols = tuple(symbols)
        self.embed = {s: tuple(int(x) for x in embed[s]) for s in self.symbols}
        self.d_model = len(next(iter(self.embed.values())))
        self.v_map = np.asarray(v_map, dtype=np.int64)
        self.ffn_w = np.asarray(ffn_w, dtype=np.int64)
        self.ffn_b = (
            np.zeros(self.ffn_w.shape[0], dtype=np.int64)
            if ffn_b is None
            else np.asarray(ffn_b, dtype=np.int64)
        )
        self.q_map = np.eye(self.d_model, dtype=np.int64) if q_map is None else np.asarray(q_map)
        self.k_map = None
        self.residual = bool(residual)
        self.start_embedding = (
            None if start_embedding is None else tuple(int(x) for x in start_embedding)
        )
        self.acceptor = acceptor
        self.name = name
        self._sym_index = {s: i for i, s in enumerate(self.symbols)}
        # per-symbol value vectors V(f_e(s)) are integer by construction
        self._values = np.array(
            [self.v_map @ np.array(self.embed[s], dtype=np.int64) for s in self.symbols],
            dtype=np.int64,
        )
        self._start_value = (
            None
            if self.start_embedding is None
            else self.v_map @ np.array(self.start_embedding, dtype=np.int64)
        )

    def tokenize(self, word):
        try:
            return [self._sym_index[s] for s in word]
        except KeyError as exc:
            raise ConstructionError(f"symbol {exc.args[0]!r} unknown to this construction") from None

    def lifted_embeddings(self, word):
        """Embedding rows fed to attention, including any internal start symbol."""
        rows = [] if self.start_embedding is None else [np.array(self.start_embedding, np.int64)]
        for s in word:
            if s not in self.embed:
                raise ConstructionError(f"symbol {s!r} unknown to this construction")
            rows.append(np.array(self.embed[s], dtype=np.int64))
        return rows

    def run(self, word, arithmetic="exact", want_trace=True):
        """Evaluate the construction; returns (accept, Trace or None)."""
        if arithmetic == "exact":
            return self._run_exact(word, want_trace)
        if arithmetic == "float":
            return self._run_float(word, want_trace)
        raise ValueError(f"unknown arithmetic mode {arithmetic!r}")

    def accepts(self, word, arithmetic="exact"):
        return self.run(word, arithmetic=arithmetic, want_trace=False)[0]

    def _run_exact(self, word, want_trace):
        xs = self.lifted_embeddings(word)
        running = np.zeros(self.d_model, dtype=np.int64)
        z_nums = []
        steps = []
        for i, x in enumerate(xs, start=1):
            running = running + (self.v_map @ x)
            a_num = running + i * x if self.residual else running.copy()
            z_num = self.ffn_w @ a_num + i * self.ffn_b
            np.maximum(z_num, 0, out=z_num)
            z_nums.append(z_num)
            if want_trace:
                steps.append(
                    TraceStep(
                        attention=tuple([Fraction(1, i)] * i),
                        a=tuple(Fraction(int(n), i) for n in a_num),
                        z=tuple(Fraction(int(n), i) for n in z_num),
                    )
                )
        accept = self.acceptor.accept_exact(z_nums)
        return accept, (Trace(steps) if want_trace else None)

    def _run_float(self, word, want_trace):
        xs = [np.asarray(x, dtype=np.float64) for x in self.lifted_embeddings(word)]
        v_map = self.v_map.astype(np.float64)
        ffn_w = self.ffn_w.astype(np.float64)
        ffn_b = self.ffn_b.astype(np.float64)
        running = np.zeros(self.d_model)
        zs = []
        steps = []
        for i, x in enumerate(xs, start=1):
            running = running + v_map @ x
            a = running / i + (x if self.residual else 0.0)
            z = np.maximum(ffn_w @ a + ffn_b, 0.0)
            zs.append(z)
            if want_trace:
                steps.append(
                    TraceStep(
                        attention=tuple([1.0 / i] * i), a=tuple(a.tolist()), z=tuple(z.tolist())
                    )
                )
        accept = self.acceptor.accept_float(zs)
        return accept, (Trace(steps) if want_trace else None)

    def accept_batch(self, words):
        """Vectorized exact acceptance over many words (kernel-backed)."""
        tokens, lengths = encode_words(self.symbols, words)
        return self.acceptor.accept_batch(self, tokens, lengths)


def encode_words(symbols, words):
    index = {s: i for i, s in enumerate(symbols)}
    lengths = np.array([len(w) for w in words], dtype=np.int64)
    tokens = np.zeros((len(words), max(int(lengths.max(initial=0)), 1)), dtype=np.int64)
    for r, w in enumerate(words):
        for c, s in enumerate(w):
            tokens[r, c] = index[s]
    return tokens, lengths


def run_hand_transformer(ht, word, arithmetic="exact"):
    """Spec-facing runner: (accept, trace) with per-step a_i, z_i, weights."""
    return ht.run(word, arithmetic=arithmetic, want_trace=True)


# ---------------------------------------------------------------------------
# acceptors
# ---------------------------------------------------------------------------


class ShuffleAcceptor:
    """Accept iff odd coordinates stay zero at every step and z_n is zero."""

    def __init__(self, k):
        self.k = k

    def accept_exact(self, z_nums):
        if not z_nums:
            return True  # empty word is in every Shuffle-k
        for z in z_nums:
            if any(z[2 * j + 1] != 0 for j in range(self.k)):
                return False
        return not z_nums[-1].any()

    accept_float = accept_exact

    def accept_batch(self, ht, tokens, lengths):
        return kernels.shuffle_accept_batch(ht._values, self.k, tokens, lengths)


class BoolExpAcceptor:
    """Accept iff the owed-operand trace stays strictly positive before the
    end, never goes negative, and lands exactly on zero.

    The stated predicate ("second coordinate zero at every step, z_n zero")
    also admits words that complete early and append arity-1 operators; the
    extra interior-positivity test rejects those, matching the 1-counter
    machine equivalence that the construction is meant to certify.
    """

    def accept_exact(self, z_nums):
        n = len(z_nums)  # lifted length, start symbol included (n >= 1)
        for i, z in enumerate(z_nums):
            if z[1] != 0:
                return False
            if i < n - 1 and z[0] == 0:
                return False
        return z_nums[-1][0] == 0

    accept_float = accept_exact

    def accept_batch(self, ht, tokens, lengths):
        return kernels.boolexp_accept_batch(ht._values[:, 0], tokens, lengths)


class RclAcceptor:
    """Zero-check plus accept-mask test on the final step of the trace."""

    def __init__(self, machine, k, state_order):
        self.k = k
        self.state_index = {q: i for i, q in enumerate(state_order)}
        self.state_order = state_order
        self.start_state = machine.start
        self.accept_mask = machine.accept_mask

    def accept_exact(self, z_nums):
        if not z_nums:
            return (self.start_state, (0,) * self.k) in self.accept_mask
        z = z_nums[-1]
        mask = tuple(
            0 if (z[2 * j] == 0 and z[2 * j + 1] == 0) else 1 for j in range(self.k)
        )
        state_block = z[2 * self.k :]
        hot = [i for i, v in enumerate(state_block) if v != 0]
        if len(hot) != 1:
            return False
        return (self.state_order[hot[0]], mask) in self.accept_mask

    accept_float = accept_exact

    def accept_batch(self, ht, tokens, lengths):
        return kernels.rcl_accept_batch(
            ht._values[:, : 2 * self.k : 2],
            self._symbol_state_table(ht),
            self._accept_table(),
            self.state_index[self.start_state],
            tokens,
            lengths,
        )

    def _symbol_state_table(self, ht):
        return np.array(
            [self.state_index[ht.extra_transition[s]] for s in ht.symbols], dtype=np.int64
        )

    def _accept_table(self):
        table = np.zeros((len(self.state_order), 2**self.k), dtype=np.uint8)
        for state, mask in self.accept_mask:
            bits = sum(b << j for j, b in enumerate(mask))
            table[self.state_index[state], bits] = 1
        return table


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def build_shuffle_dyck(k):
    """Uniform-attention recognizer for Shuffle-k (Dyck-1 when k = 1).

    Open bracket j embeds as +1/-1 at coordinates 2j/2j+1, its close as the
    negation; identity Q/V, null K, identity ReLU FFN.  The attention output
    divided out by the step index tracks each bracket type's depth ratio.
    """
    if k < 1 or k > len(DYCK_PAIRS):
        raise ConstructionError(f"unsupported shuffle width {k}")
    pairs = DYCK_PAIRS[:k]
    d = 2 * k
    embed = {}
    for j, (o, c) in enumerate(pairs):
        vec = [0] * d
        vec[2 * j], vec[2 * j + 1] = 1, -1
        embed[o] = tuple(vec)
        embed[c] = tuple(-x for x in vec)
    symbols = [s for p in pairs for s in p]
    return HandTransformer(
        symbols=symbols,
        embed=embed,
        v_map=np.eye(d, dtype=np.int64),
        ffn_w=np.eye(d, dtype=np.int64),
        acceptor=ShuffleAcceptor(k),
        name=f"shuffle{k}-construction",
    )


_DEFAULT_OP_SYMBOLS = {1: ["∼", "¬", "!"], 2: ["∧", "+", "∨"], 3: [">", "?"], 4: ["§"], 5: ["¶"]}


def boolexp_symbol_arities(spec_or_arities):
    """Normalize a LanguageSpec, (symbol, arity) pairs, or bare arities."""
    if isinstance(spec_or_arities, LanguageSpec):
        arities = dict(spec_or_arities.extra["arities"])
        if not arities:
            raise ConstructionError("language has no arity table")
        return arities
    items = list(spec_or_arities)
    if items and isinstance(items[0], (tuple, list)):
        arities = {sym: int(r) for sym, r in items}
    else:
        pools = {r: list(_DEFAULT_OP_SYMBOLS[r]) for r in set(items)}
        arities = {}
        for r in items:
            if not pools[int(r)]:
                raise ConstructionError(f"too many arity-{r} operators for default symbols")
            arities[pools[int(r)].pop(0)] = int(r)
    for v in ("0", "1"):
        arities.setdefault(v, 0)
    if any(r < 0 for r in arities.values()):
        raise ConstructionError("arities must be nonnegative")
    if not any(r > 0 for r in arities.values()):
        raise ConstructionError("at least one operator required")
    return arities


def build_boolexp(spec_or_arities):
    """Width-2 uniform-attention recognizer for prefix boolean expressions.

    A start symbol embedding [+1, -1] is prepended internally; a symbol of
    arity r embeds as [r-1, -(r-1)] (values 0/1 have arity 0).
    """
    arities = boolexp_symbol_arities(spec_or_arities)
    symbols = list(arities)
    embed = {s: (arities[s] - 1, -(arities[s] - 1)) for s in symbols}
    return HandTransformer(
        symbols=symbols,
        embed=embed,
        v_map=np.eye(2, dtype=np.int64),
        ffn_w=np.eye(2, dtype=np.int64),
        start_embedding=(1, -1),
        acceptor=BoolExpAcceptor(),
        name="boolexp-construction",
    )


def build_rcl(machine):
    """Recognizer for a simplified stateless counter machine.

    d_model = 2k + |alphabet|: the first 2k coordinates carry the +-counter
    averages, the trailing block the one-hot of the current symbol (kept by
    the residual connection); the FFN copies the counter block and maps the
    symbol one-hot to the state one-hot.
    """
    if not isinstance(machine, StatelessCounterMachine):
        raise ConstructionError("build_rcl needs a StatelessCounterMachine")
    symbols = machine.alphabet
    k = machine.k
    n_sym = len(symbols)
    d = 2 * k + n_sym
    embed = {}
    for i, s in enumerate(symbols):
        vec = [0] * d
        vec[2 * k + i] = 1
        embed[s] = tuple(vec)
    # V: one-hot block -> (+m, -m) per counter, zero elsewhere
    v_map = np.zeros((d, d), dtype=np.int64)
    for i, s in enumerate(symbols):
        for j in range(k):
            m = machine.update[s][j]
            v_map[2 * j, 2 * k + i] = m
            v_map[2 * j + 1, 2 * k + i] = -m
    # FFN: keep counter block, map symbol one-hot to state one-hot
    state_order = sorted(machine.states, key=repr)
    state_index = {q: i for i, q in enumerate(state_order)}
    out_dim = 2 * k + len(state_order)
    ffn_w = np.zeros((out_dim, d), dtype=np.int64)
    for j in range(2 * k):
        ffn_w[j, j] = 1
    for i, s in enumerate(symbols):
        ffn_w[2 * k + state_index[machine.transition[s]], 2 * k + i] = 1
    ht = HandTransformer(
        symbols=symbols,
        embed=embed,
        v_map=v_map,
        ffn_w=ffn_w,
        residual=True,
        acceptor=RclAcceptor(machine, k, state_order),
        name="rcl-construction",
    )
    ht.extra_transition = dict(machine.transition)
    return ht


# ---------------------------------------------------------------------------
# impossibility-result checks
# ---------------------------------------------------------------------------


def _model_scheme(model):
    return getattr(getattr(model, "config", None), "scheme", None)


def check_masking_constancy(model, n, symbol=None, require_masking=True):
    """Max step-to-step output deviation of a model on a unary word a^n.

    With causal masking as the only positional signal, every step sees the
    same multiset of identical vectors, so outputs must coincide; the
    returned deviation is max_i ||y_i - y_1||_inf.
    """
    scheme = _model_scheme(model)
    if require_masking and scheme not in (None, "masking"):
        raise PreconditionError(f"model declares positional encodings ({scheme})")
    vocab = model.config.vocab
    word = (symbol or vocab[0]) * n
    rows = model.step_outputs(word)
    return float(np.abs(rows - rows[0]).max())


def check_reset_invariance(model, prefix_a, prefix_b, suffix, reset_symbol="#"):
    """Deltas of the reset symbol's attention logit and value vector when an
    equal-length prefix is swapped in front of it.

    For a single-layer masking-only model both quantities depend on the
    reset symbol alone, so both deltas must be exactly zero.
    """
    layers = getattr(model.config, "layers", None)
    if layers != 1:
        raise PreconditionError(f"model has {layers} layers; the check needs exactly 1")
    if _model_scheme(model) != "masking":
        raise PreconditionError("model must be masking-only")
    if len(prefix_a) != len(prefix_b):
        raise PreconditionError("prefixes must have equal length")
    word_a = prefix_a + reset_symbol + suffix
    word_b = prefix_b + reset_symbol + suffix
    r = len(prefix_a)  # position of the reset symbol
    n = len(word_a) - 1
    qa, ka, va = model.attention_internals(word_a, layer=0)
    qb, kb, vb = model.attention_internals(word_b, layer=0)
    # per-head scores <Q(x_n), K(x_r)>
    logit_a = np.einsum("hd,hd->h", qa[:, n, :], ka[:, r, :])
    logit_b = np.einsum("hd,hd->h", qb[:, n, :], kb[:, r, :])
    logit_delta = float(np.abs(logit_a - logit_b).max())
    value_delta = float(np.abs(va[:, r, :] - vb[:, r, :]).max())
    return logit_delta, value_delta


def trace_to_jsonable(trace):
    """Trace as plain JSON data; exact entries become 'p/q' strings."""

    def enc(x):
        if isinstance(x, Fraction):
            return str(x)
        return float(x)

    return {
        "steps": [
            {
                "attention": [enc(v) for v in s.attention],
                "a": [enc(v) for v in s.a],
                "z": [enc(v) for v in s.z],
            }
            for s in trace.steps
        ]
    }

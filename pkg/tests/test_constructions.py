import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fllab import kernels
from fllab.catalog import DYCK_PAIRS, get_language, shuffle_stateless_machine
from fllab.constructions import (
    ConstructionError,
    PreconditionError,
    build_boolexp,
    build_rcl,
    build_shuffle_dyck,
    check_masking_constancy,
    check_reset_invariance,
    encode_words,
    run_hand_transformer,
    trace_to_jsonable,
)
from fllab.neural import TransformerConfig, make_model


def test_shuffle_embeddings():
    ht = build_shuffle_dyck(1)
    assert ht.embed["["] == (1, -1)
    assert ht.embed["]"] == (-1, 1)
    ht2 = build_shuffle_dyck(2)
    assert ht2.embed["("] == (0, 0, 1, -1)
    assert ht2.d_model == 4


def test_shuffle_trace_examples():
    ht = build_shuffle_dyck(1)
    accept, trace = run_hand_transformer(ht, "[[]")
    assert trace.steps[2].a == (Fraction(1, 3), Fraction(-1, 3))
    assert not accept
    accept, trace = run_hand_transformer(ht, "][")
    assert not accept
    assert trace.steps[0].z[1] > 0  # the odd coordinate flags the deficit
    accept, trace = run_hand_transformer(ht, "[]")
    assert accept
    assert trace.steps[0].a == (Fraction(1), Fraction(-1))
    assert trace.steps[1].a == (Fraction(0), Fraction(0))
    # empty word: vacuous acceptor
    assert ht.accepts("")


def test_shuffle2_paper_words():
    ht = build_shuffle_dyck(2)
    assert ht.accepts("([)]")
    assert ht.accepts("[((]))")
    assert not ht.accepts("])[(")


def test_attention_rows_uniform():
    ht = build_shuffle_dyck(1)
    _, trace = run_hand_transformer(ht, "[[]]")
    for i, step in enumerate(trace.steps, start=1):
        assert step.attention == tuple([Fraction(1, i)] * i)
        assert sum(step.attention) == 1


@given(st.lists(st.integers(0, 1), min_size=1, max_size=60))
@settings(max_examples=100)
def test_depth_ratio_identity(bits):
    """a_i[0] * i equals (count '[' - count ']') exactly, for every prefix."""
    ht = build_shuffle_dyck(1)
    word = "".join("[]"[b] for b in bits)
    _, trace = run_hand_transformer(ht, word)
    depth = 0
    for i, (sym, step) in enumerate(zip(word, trace.steps), start=1):
        depth += 1 if sym == "[" else -1
        assert step.a[0] * i == depth


def test_unknown_symbol_errors():
    ht = build_shuffle_dyck(1)
    with pytest.raises(ConstructionError):
        ht.accepts("[x]")


def test_boolexp_embeddings_and_instances():
    ht = build_boolexp([1, 2, 3])
    assert ht.embed["∼"] == (0, 0)
    assert ht.embed["∧"] == (1, -1)
    assert ht.embed[">"] == (2, -2)
    assert ht.embed["0"] == (-1, 1) and ht.embed["1"] == (-1, 1)
    assert ht.start_embedding == (1, -1)
    assert ht.accepts("∧∼01")
    assert not ht.accepts("∼10")
    assert not ht.accepts("")


def test_boolexp_from_language_spec():
    lang = get_language("boolexp3")
    ht = build_boolexp(lang)
    assert set(ht.symbols) == set(lang.alphabet)
    for w in ("+01", "∼∼1", ">111", "+0", "10"):
        assert ht.accepts(w) == lang.recognizer.accepts(w), w


def test_boolexp_exhaustive_vs_machine_small():
    lang = get_language("boolexp3")
    ht = build_boolexp(lang)
    for length in range(0, 6):
        for word in itertools.product(lang.alphabet, repeat=length):
            word = "".join(word)
            assert ht.accepts(word) == lang.recognizer.accepts(word), word


def test_rcl_construction_layout():
    sm = shuffle_stateless_machine(DYCK_PAIRS[:2])
    ht = build_rcl(sm)
    assert ht.d_model == 2 * 2 + 4
    assert ht.residual
    # +0-update symbols contribute a zero counter block to the value vector
    values = {s: ht._values[i] for i, s in enumerate(ht.symbols)}
    assert values["["].tolist()[:4] == [1, -1, 0, 0]
    assert values["("].tolist()[:4] == [0, 0, 1, -1]
    assert all(v.tolist()[4:] == [0, 0, 0, 0] for v in values.values())


def test_rcl_agrees_with_stateless_machine():
    sm = shuffle_stateless_machine(DYCK_PAIRS[:2])
    ht = build_rcl(sm)
    assert ht.accepts("([)]")
    assert not ht.accepts("])[(")
    for length in range(0, 7):
        for word in itertools.product(sm.alphabet, repeat=length):
            word = "".join(word)
            assert ht.accepts(word) == sm.accepts(word), word


def test_rcl_dyck1_stateless():
    sm = shuffle_stateless_machine(DYCK_PAIRS[:1])
    ht = build_rcl(sm)
    assert ht.accepts("[]")
    assert not ht.accepts("[")


def test_float_mode_agrees_with_exact_up_to_150():
    ht = build_shuffle_dyck(2)
    lang = get_language("shuffle2")
    machine = lang.recognizer
    rng = np.random.default_rng(2)
    for _ in range(300):
        n = int(rng.integers(0, 151))
        word = "".join(rng.choice(lang.alphabet, size=n))
        exact = ht.accepts(word, arithmetic="exact")
        floaty = ht.accepts(word, arithmetic="float")
        assert exact == floaty == machine.accepts(word)


def test_batch_accept_matches_scalar():
    ht = build_shuffle_dyck(2)
    rng = np.random.default_rng(3)
    words = ["".join(rng.choice(ht.symbols, size=rng.integers(0, 30))) for _ in range(500)]
    batch = ht.accept_batch(words)
    scalar = np.array([ht.accepts(w) for w in words], dtype=np.uint8)
    assert (batch == scalar).all()

    lang = get_language("boolexp3")
    hb = build_boolexp(lang)
    words = ["".join(rng.choice(hb.symbols, size=rng.integers(0, 30))) for _ in range(500)]
    assert (hb.accept_batch(words) == np.array([hb.accepts(w) for w in words])).all()

    sm = shuffle_stateless_machine(DYCK_PAIRS[:2])
    hr = build_rcl(sm)
    words = ["".join(rng.choice(hr.symbols, size=rng.integers(0, 30))) for _ in range(500)]
    assert (hr.accept_batch(words) == np.array([hr.accepts(w) for w in words])).all()


def test_uniform_attention_is_exact_mean():
    """With zero keys, attention output is the exact arithmetic mean of values."""
    ht = build_shuffle_dyck(2)
    rng = np.random.default_rng(4)
    word = "".join(rng.choice(ht.symbols, size=17))
    _, trace = run_hand_transformer(ht, word)
    acc = np.zeros(4, dtype=object)
    for i, sym in enumerate(word, start=1):
        acc = acc + ht._values[ht._sym_index[sym]]
        expect = tuple(Fraction(int(v), i) for v in acc)
        assert trace.steps[i - 1].a == expect


def test_trace_export_jsonable():
    import json

    ht = build_boolexp([1, 2])
    _, trace = run_hand_transformer(ht, "∧01")
    blob = trace_to_jsonable(trace)
    parsed = json.loads(json.dumps(blob, ensure_ascii=False))
    assert len(parsed["steps"]) == 4  # start symbol included
    assert parsed["steps"][0]["a"] == ["1", "-1"]


def test_null_key_map_required():
    from fllab.constructions import HandTransformer

    with pytest.raises(ConstructionError):
        HandTransformer(
            symbols="ab",
            embed={"a": (1,), "b": (0,)},
            v_map=np.eye(1),
            ffn_w=np.eye(1),
            k_map=np.eye(1),
        )


def test_masking_constancy_hand_construction():
    # identical value vectors average to themselves: all a_i equal on '[[[['
    ht = build_shuffle_dyck(1)
    _, trace = run_hand_transformer(ht, "[[[[")
    assert all(s.a == trace.steps[0].a for s in trace.steps)


def test_masking_constancy_random_models_and_cos_contrast():
    rng = np.random.default_rng(6)
    for _ in range(5):
        cfg = TransformerConfig(vocab=("a",), d_model=8, heads=2,
                                layers=int(rng.integers(1, 5)), scheme="masking")
        model = make_model(cfg, seed=int(rng.integers(2**31)))
        assert check_masking_constancy(model, 8) < 1e-6
    deviations = []
    for seed in range(5):
        cfg = TransformerConfig(vocab=("a",), d_model=8, heads=2, layers=2, scheme="cos")
        model = make_model(cfg, seed=seed)
        deviations.append(check_masking_constancy(model, 8, require_masking=False))
    assert max(deviations) > 0.1  # encodings break step constancy


def test_masking_constancy_precondition():
    cfg = TransformerConfig(vocab=("a",), d_model=8, heads=1, layers=1, scheme="absolute")
    model = make_model(cfg, seed=0)
    with pytest.raises(PreconditionError):
        check_masking_constancy(model, 8)


def test_reset_invariance_single_layer():
    cfg = TransformerConfig(vocab=("[", "]", "#"), d_model=8, heads=2, layers=1, scheme="masking")
    model = make_model(cfg, seed=7)
    logit_delta, value_delta = check_reset_invariance(model, "[[", "]]", "[]")
    assert logit_delta == 0.0 and value_delta == 0.0
    # identical prefixes trivially give zero deltas
    assert check_reset_invariance(model, "[[", "[[", "[]") == (0.0, 0.0)


def test_reset_invariance_preconditions():
    cfg = TransformerConfig(vocab=("[", "]", "#"), d_model=8, heads=1, layers=2, scheme="masking")
    model = make_model(cfg, seed=8)
    with pytest.raises(PreconditionError):
        check_reset_invariance(model, "[[", "]]", "[]")
    cfg = TransformerConfig(vocab=("[", "]", "#"), d_model=8, heads=1, layers=1, scheme="absolute")
    model = make_model(cfg, seed=8)
    with pytest.raises(PreconditionError):
        check_reset_invariance(model, "[[", "]]", "[]")
    cfg = TransformerConfig(vocab=("[", "]", "#"), d_model=8, heads=1, layers=1, scheme="masking")
    model = make_model(cfg, seed=8)
    with pytest.raises(PreconditionError):
        check_reset_invariance(model, "[[[", "]]", "[]")


def test_two_layer_value_vectors_depend_on_prefix():
    """The single-layer invariance argument stops holding with two layers."""
    cfg = TransformerConfig(vocab=("[", "]", "#"), d_model=8, heads=1, layers=2, scheme="masking")
    model = make_model(cfg, seed=9)
    word_a, word_b = "[[#[]", "]]#[]"
    qa, ka, va = model.attention_internals(word_a, layer=1)
    qb, kb, vb = model.attention_internals(word_b, layer=1)
    assert np.abs(va[:, 2, :] - vb[:, 2, :]).max() > 1e-6

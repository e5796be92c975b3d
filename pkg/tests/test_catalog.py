import itertools

import numpy as np
import pytest

import oracles
from fllab import kernels
from fllab.catalog import CATALOG, DYCK_PAIRS, class_label, get_language, membership
from fllab.constructions import encode_words
from fllab.machines import RejectedInput

SMALL_ALPHABET_LANGS = sorted(
    lang_id for lang_id, lang in CATALOG.items() if len(lang.alphabet) <= 3
)


def _oracle_for(lang_id):
    if lang_id == "dyck1":
        return oracles.dyck1
    if lang_id == "reset_dyck1":
        return oracles.reset_dyck1
    if lang_id in ("anbn", "anbncn"):
        letters = get_language(lang_id).alphabet
        return lambda w: oracles.staircase(w, letters)
    return oracles.REGULAR[lang_id]


def _accepts_all(lang, words):
    if hasattr(lang.recognizer, "dead"):  # DFA
        return np.array([lang.recognizer.accepts(w) for w in words], dtype=np.uint8)
    tokens, lengths = encode_words(lang.alphabet, words)
    return kernels.cm_accept_batch(lang.recognizer, tokens, lengths)


@pytest.mark.parametrize("lang_id", SMALL_ALPHABET_LANGS)
def test_membership_exhaustive_vs_independent_oracle(lang_id):
    """All strings of length <= 10 agree with the grammar/regex semantics."""
    lang = get_language(lang_id)
    oracle = _oracle_for(lang_id)
    words = []
    for length in range(11):
        words += ["".join(p) for p in itertools.product(lang.alphabet, repeat=length)]
    got = _accepts_all(lang, words)
    want = np.array([oracle(w) for w in words], dtype=np.uint8)
    bad = np.nonzero(got != want)[0]
    assert not bad.size, f"{lang_id}: first disagreement {words[bad[0]]!r}"


@pytest.mark.parametrize("k", [1, 2])
def test_shuffle_acceptance_matches_depth_counter_oracle(k):
    """Shuffle-k machine == per-type balance plus no prefix deficit, len <= 10."""
    lang = get_language("dyck1" if k == 1 else f"shuffle{k}")
    pairs = lang.extra["pairs"]
    max_len = 10 if k == 1 else 9
    words = []
    for length in range(max_len + 1):
        words += ["".join(p) for p in itertools.product(lang.alphabet, repeat=length)]
    tokens, lengths = encode_words(lang.alphabet, words)
    got = kernels.cm_accept_batch(lang.recognizer, tokens, lengths)
    want = np.array([oracles.shuffle(w, pairs) for w in words], dtype=np.uint8)
    assert (got == want).all()


def test_boolexp_membership_vs_prefix_expression_oracle():
    lang = get_language("boolexp3")
    arities = lang.extra["arities"]
    for length in range(0, 7):
        for word in itertools.product(lang.alphabet, repeat=length):
            word = "".join(word)
            assert membership(lang, word) == oracles.prefix_expression(word, arities), word


def test_paper_membership_instances():
    s2 = get_language("shuffle2")
    assert membership(s2, "([)]")
    assert membership(s2, "[((]))")
    assert not membership(s2, "])[(")
    b3 = get_language("boolexp3")
    assert not membership(b3, "∼10")


def test_membership_alphabet_mismatch():
    with pytest.raises(RejectedInput):
        membership(get_language("dyck1"), "ab")


def test_catalog_covers_the_study_set():
    # 27 languages in the statistics table plus reset-dyck-1 and D_1
    assert len(CATALOG) == 29
    non_star_free = {"tomita3", "tomita5", "tomita6", "parity", "aa_star", "aaaa_star", "abab_star"}
    for lang_id in non_star_free:
        assert "non-star-free" in CATALOG[lang_id].tags
    for lang_id in ("tomita1", "tomita2", "tomita4", "tomita7", "abcde_plus", "ab_d_bc"):
        assert "star-free" in CATALOG[lang_id].tags
        assert CATALOG[lang_id].dot_depth == 1
    assert CATALOG["zero12"].dot_depth == 2
    for n in (1, 2, 3, 4, 12):
        assert CATALOG[f"dn{n}"].dot_depth == n
    for lang_id in ("dyck1", "shuffle2", "shuffle4", "shuffle6", "boolexp3", "boolexp5",
                    "anbn", "anbncn", "anbncndn", "reset_dyck1"):
        assert "counter" in CATALOG[lang_id].tags


def test_recognizer_alphabet_matches_language():
    for lang in CATALOG.values():
        assert tuple(lang.recognizer.alphabet) == lang.alphabet


def test_class_labels_render():
    assert class_label(get_language("dyck1")) == "counter"
    assert "dot-depth 2" in class_label(get_language("zero12"))
    assert class_label(get_language("parity")) == "non-star-free"


def test_shuffle6_pairs_are_disjoint():
    seen = set()
    for o, c in DYCK_PAIRS:
        assert o not in seen and c not in seen
        seen |= {o, c}

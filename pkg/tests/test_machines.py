import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fllab.catalog import DYCK_PAIRS, get_language, shuffle_stateless_machine
from fllab.machines import (
    RESET,
    CounterMachine,
    Dfa,
    MachineConfig,
    MachineDefinitionError,
    RejectedInput,
    StatelessCounterMachine,
    cm_accepts,
    cm_step,
    zero_mask,
)


def test_zero_mask_examples():
    assert zero_mask([0, 0]) == (0, 0)
    assert zero_mask([0, 3]) == (0, 1)
    assert zero_mask([-2, 0, 7]) == (1, 0, 1)


@given(st.lists(st.integers(-50, 50), max_size=8))
def test_zero_mask_definition(counters):
    mask = zero_mask(counters)
    assert all((m == 0) == (c == 0) for m, c in zip(mask, counters))


@pytest.fixture
def dyck_machine():
    return get_language("dyck1").recognizer


def test_cm_step_dyck_examples(dyck_machine):
    start = dyck_machine.initial_config
    after_open = cm_step(dyck_machine, start, "[")
    assert after_open == MachineConfig("run", (1,))
    # closing at depth zero kills the run but still decrements the counter
    after_bad_close = cm_step(dyck_machine, start, "]")
    assert after_bad_close.state == "dead"
    assert after_bad_close.counters == (-1,)


def test_cm_step_identity_update():
    machine = CounterMachine(
        alphabet="ab",
        states={"q"},
        start="q",
        k=2,
        update=lambda s, q, m: (0, 0),
        transition=lambda s, q, m: "q",
        accept_mask={("q", (0, 0))},
    )
    config = MachineConfig("q", (3, -1))
    assert cm_step(machine, config, "a").counters == (3, -1)


def test_cm_accepts_dyck(dyck_machine):
    assert cm_accepts(dyck_machine, "[]")
    assert not cm_accepts(dyck_machine, "][")
    assert cm_accepts(dyck_machine, "")


def test_unknown_symbol_rejected(dyck_machine):
    with pytest.raises(RejectedInput):
        cm_accepts(dyck_machine, "[x]")


def test_reset_operation_roundtrip():
    machine = get_language("reset_dyck1").recognizer
    config = machine.run("]]]")
    assert config.counters == (-3,)
    config = cm_step(machine, config, "#")
    assert config.counters == (0,) and config.state == "post"


def test_counter_machine_totality_checked():
    with pytest.raises(MachineDefinitionError):
        CounterMachine(
            alphabet="a",
            states={"q"},
            start="q",
            k=1,
            update=lambda s, q, m: (1, 2),  # wrong arity
            transition=lambda s, q, m: "q",
            accept_mask=set(),
        )


@given(st.lists(st.integers(0, 3), max_size=20))
@settings(max_examples=200)
def test_stateless_embedding_equivalence(token_ids):
    sm = shuffle_stateless_machine(DYCK_PAIRS[:2])
    embedded = sm.as_counter_machine()
    word = "".join(sm.alphabet[i] for i in token_ids)
    assert sm.accepts(word) == embedded.accepts(word)


def test_stateless_rejects_reset_updates():
    with pytest.raises(MachineDefinitionError):
        StatelessCounterMachine(
            alphabet="a",
            start="q",
            k=1,
            update={"a": (RESET,)},
            transition={"a": "q"},
            accept_mask={("q", (0,))},
        )


def _exhaustive_dead(dfa):
    """A state is dead iff no accepted continuation exists within |Q| steps."""
    dead = set()
    for state in dfa.states:
        frontier = {state}
        seen = set(frontier)
        found = state in dfa.accepting
        for _ in range(len(dfa.states)):
            if found:
                break
            frontier = {
                dfa.transition[q, s] for q in frontier for s in dfa.alphabet
            } - seen
            seen |= frontier
            found = any(q in dfa.accepting for q in frontier)
        if not found:
            dead.add(state)
    return dead


@pytest.mark.parametrize("lang_id", ["tomita3", "tomita7", "dn4", "zero12", "abcde_plus", "ab_d_bc"])
def test_dfa_dead_states_match_exhaustive_search(lang_id):
    dfa = get_language(lang_id).recognizer
    assert isinstance(dfa, Dfa)
    assert dfa.dead == frozenset(_exhaustive_dead(dfa))


def test_dfa_requires_total_transition():
    with pytest.raises(MachineDefinitionError):
        Dfa("ab", {"q"}, "q", {("q", "a"): "q"}, {"q"})

"""Catalog of the study languages and their next-symbol semantics.

Each language carries a recognizer (counter machine or DFA), class tags
(counter / star-free / non-star-free, dot-depth where defined), and an
incremental "stepper" that yields the set of legal next symbols after any
live prefix.  Membership always goes through the recognizer; the steppers
are independent closed-form implementations validated against a brute-force
continuation search over the recognizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .machines import (
    RESET,
    CounterMachine,
    Dfa,
    MachineConfig,
    RejectedInput,
    StatelessCounterMachine,
    zero_mask,
)

#: End-of-sequence marker used in legal-next sets and as the last target
#: coordinate.  Deliberately multi-character so it cannot collide with the
#: single-character language alphabets.
EOS = "<eos>"

DEAD = "dead"


class DeadPrefixError(Exception):
    """A prefix with no in-language continuation was fed to a stepper."""


# ---------------------------------------------------------------------------
# steppers: incremental legal-next trackers, one flavor per language family
# ---------------------------------------------------------------------------


class DfaStepper:
    """Legal-next via DFA state: a symbol is legal iff it avoids dead states."""

    def __init__(self, dfa):
        self.dfa = dfa
        self.state = dfa.start
        self._legal_cache = {}

    def advance(self, symbol):
        nxt = self.dfa.step(self.state, symbol)
        if nxt in self.dfa.dead:
            raise DeadPrefixError(f"symbol {symbol!r} kills the run")
        self.state = nxt

    def legal(self):
        cached = self._legal_cache.get(self.state)
        if cached is None:
            out = {s for s in self.dfa.alphabet if self.dfa.transition[self.state, s] not in self.dfa.dead}
            if self.state in self.dfa.accepting:
                out.add(EOS)
            cached = self._legal_cache[self.state] = frozenset(out)
        return cached

    def counters(self):
        return None


class BracketStepper:
    """Shuffle-k (Dyck-1 when k=1): per-type depths must stay nonnegative."""

    def __init__(self, pairs):
        self.pairs = pairs  # list of (open, close)
        self.open_index = {o: j for j, (o, _) in enumerate(pairs)}
        self.close_index = {c: j for j, (_, c) in enumerate(pairs)}
        self.depths = [0] * len(pairs)

    def advance(self, symbol):
        if symbol in self.open_index:
            self.depths[self.open_index[symbol]] += 1
        elif symbol in self.close_index:
            j = self.close_index[symbol]
            if self.depths[j] == 0:
                raise DeadPrefixError(f"closing {symbol!r} at depth 0")
            self.depths[j] -= 1
        else:
            raise RejectedInput(f"symbol {symbol!r} not a bracket of this language")

    def legal(self):
        out = set(self.open_index)
        for (o, c), d in zip(self.pairs, self.depths):
            if d > 0:
                out.add(c)
        if all(d == 0 for d in self.depths):
            out.add(EOS)
        return frozenset(out)

    def counters(self):
        return tuple(self.depths)


class PrefixExprStepper:
    """Prefix-notation expressions: tracks how many operands are still owed."""

    def __init__(self, arities):
        self.arities = arities  # symbol -> arity (values have arity 0)
        self.need = 1

    def advance(self, symbol):
        if symbol not in self.arities:
            raise RejectedInput(f"symbol {symbol!r} not in expression alphabet")
        if self.need == 0:
            raise DeadPrefixError("expression already complete")
        self.need += self.arities[symbol] - 1

    def legal(self):
        if self.need > 0:
            return frozenset(self.arities)
        return frozenset({EOS})

    def counters(self):
        return (self.need,)


class StaircaseStepper:
    """Languages l1^n l2^n ... lm^n (n >= 1) for an ordered letter list."""

    def __init__(self, letters):
        self.letters = letters
        self.phase = 0
        self.first = 0  # count of letters[0]
        self.here = 0  # count within current phase

    def advance(self, symbol):
        m = len(self.letters)
        if symbol not in self.letters:
            raise RejectedInput(f"symbol {symbol!r} not in alphabet {self.letters}")
        want = self.letters[self.phase]
        if symbol == want and (self.phase == 0 or self.here < self.first):
            self.here += 1
            if self.phase == 0:
                self.first += 1
            return
        # only other legal move: begin the next phase
        if (
            self.phase + 1 < m
            and symbol == self.letters[self.phase + 1]
            and (self.phase == 0 and self.first > 0 or self.phase > 0 and self.here == self.first)
        ):
            self.phase += 1
            self.here = 1
            return
        raise DeadPrefixError(f"symbol {symbol!r} illegal in phase {self.phase}")

    def legal(self):
        m = len(self.letters)
        out = set()
        if self.phase == 0:
            out.add(self.letters[0])
            if self.first > 0:
                out.add(self.letters[1])
        elif self.here < self.first:
            out.add(self.letters[self.phase])
        elif self.phase + 1 < m:
            out.add(self.letters[self.phase + 1])
        else:
            out.add(EOS)
        return frozenset(out)

    def counters(self):
        return None


class ResetDyckStepper:
    """Sigma* '#' v with v in Dyck-1: '#' wipes everything before it."""

    def __init__(self):
        self.saw_reset = False
        self.tail_depth = 0
        self.tail_broken = False  # tail closed below depth 0 since last '#'

    def advance(self, symbol):
        if symbol == "#":
            self.saw_reset = True
            self.tail_depth = 0
            self.tail_broken = False
        elif symbol == "[":
            self.tail_depth += 1
        elif symbol == "]":
            if self.tail_depth == 0:
                self.tail_broken = True
            else:
                self.tail_depth -= 1
        else:
            raise RejectedInput(f"symbol {symbol!r} not in alphabet ('[', ']', '#')")

    def legal(self):
        # any symbol is always legal: a later '#' can still erase the past
        out = {"[", "]", "#"}
        if self.saw_reset and not self.tail_broken and self.tail_depth == 0:
            out.add(EOS)
        return frozenset(out)

    def counters(self):
        return (self.tail_depth,)


# ---------------------------------------------------------------------------
# recognizers
# ---------------------------------------------------------------------------


def shuffle_machine(pairs):
    """Counter machine for Shuffle-k: one counter per bracket type."""
    k = len(pairs)
    opens = {o: j for j, (o, _) in enumerate(pairs)}
    closes = {c: j for j, (_, c) in enumerate(pairs)}
    alphabet = [s for pair in pairs for s in pair]

    def unit(j, m):
        return tuple(m if i == j else 0 for i in range(k))

    def update(sym, state, mask):
        if sym in opens:
            return unit(opens[sym], +1)
        return unit(closes[sym], -1)

    def transition(sym, state, mask):
        if state == DEAD:
            return DEAD
        if sym in closes and mask[closes[sym]] == 0:
            return DEAD  # closing at depth 0
        return "run"

    return CounterMachine(
        alphabet=alphabet,
        states={"run", DEAD},
        start="run",
        k=k,
        update=update,
        transition=transition,
        accept_mask={("run", (0,) * k)},
    )


def shuffle_stateless_machine(pairs):
    """Stateless relaxation of Shuffle-k: balanced counts, last symbol closing.

    Without access to states or masks during the run, prefix deficits cannot
    be detected, so this machine accepts a superset of Shuffle-k.
    """
    k = len(pairs)
    update = {}
    transition = {}
    accept = {("start", (0,) * k)}
    for j, (o, c) in enumerate(pairs):
        unit = lambda m, jj=j: tuple(m if i == jj else 0 for i in range(k))
        update[o] = unit(+1)
        update[c] = unit(-1)
        transition[o] = "after_open"
        transition[c] = "after_close"
    accept.add(("after_close", (0,) * k))
    alphabet = [s for pair in pairs for s in pair]
    return StatelessCounterMachine(
        alphabet=alphabet,
        start="start",
        k=k,
        update=update,
        transition=transition,
        accept_mask=accept,
    )


def prefix_expr_machine(arities):
    """1-counter machine for prefix expressions; the counter holds the number
    of operands still owed, and any symbol read at zero owed kills the run."""

    def update(sym, state, mask):
        if state == DEAD:
            return (0,)
        if state == "start":
            return (arities[sym],)
        if mask[0] == 0:
            return (0,)  # moving to dead; leave the counter alone
        return (arities[sym] - 1,)

    def transition(sym, state, mask):
        if state == DEAD:
            return DEAD
        if state == "run" and mask[0] == 0:
            return DEAD
        return "run"

    return CounterMachine(
        alphabet=list(arities),
        states={"start", "run", DEAD},
        start="start",
        k=1,
        update=update,
        transition=transition,
        accept_mask={("run", (0,))},
    )


def staircase_machine(letters):
    """Counter machine for l1^n ... lm^n, one counter per later phase."""
    m = len(letters)
    k = m - 1
    phases = {sym: i for i, sym in enumerate(letters)}
    states = {f"p{i}" for i in range(m)} | {DEAD}

    def update(sym, state, mask):
        if state == DEAD:
            return (0,) * k
        i = phases[sym]
        if i == 0:
            return (1,) * k  # every later phase owes one matching letter
        return tuple(-1 if j == i - 1 else 0 for j in range(k))

    def transition(sym, state, mask):
        if state == DEAD:
            return DEAD
        i = phases[sym]
        cur = int(state[1:])
        if i == cur and (i == 0 or mask[i - 1] == 1):
            return state
        if i == cur + 1 and mask[i - 1] == 1 and all(mask[j] == 0 for j in range(i - 1)):
            return f"p{i}"
        return DEAD

    return CounterMachine(
        alphabet=letters,
        states=states,
        start="p0",
        k=k,
        update=update,
        transition=transition,
        accept_mask={(f"p{m - 1}", (0,) * k)},
    )


def reset_dyck_machine():
    """Counter machine for Reset-Dyck-1; '#' applies the reset operation."""

    def update(sym, state, mask):
        if sym == "#":
            return (RESET,)
        if state == "soiled":
            return (0,)
        return (1,) if sym == "[" else (-1,)

    def transition(sym, state, mask):
        if sym == "#":
            return "post"
        if state == "pre":
            return "pre"
        if state == "post":
            if sym == "]" and mask[0] == 0:
                return "soiled"
            return "post"
        return "soiled"

    return CounterMachine(
        alphabet=["[", "]", "#"],
        states={"pre", "post", "soiled"},
        start="pre",
        k=1,
        update=update,
        transition=transition,
        accept_mask={("post", (0,))},
    )


def _dfa(alphabet, table, start, accepting):
    """Build a Dfa from {state: {symbol: next}} shorthand."""
    states = set(table)
    transition = {}
    for state, row in table.items():
        for sym in alphabet:
            transition[state, sym] = row[sym]
    return Dfa(alphabet, states, start, transition, accepting)


def tomita_dfa(n):
    if n == 1:  # 1*
        return _dfa("01", {"q": {"0": DEAD, "1": "q"}, DEAD: {"0": DEAD, "1": DEAD}}, "q", {"q"})
    if n == 2:  # (10)*
        return _dfa(
            "01",
            {
                "even": {"1": "odd", "0": DEAD},
                "odd": {"0": "even", "1": DEAD},
                DEAD: {"0": DEAD, "1": DEAD},
            },
            "even",
            {"even"},
        )
    if n == 3:  # odd 1-runs are never followed by odd 0-runs
        return _dfa(
            "01",
            {
                "safe": {"1": "odd1", "0": "safe"},
                "odd1": {"1": "safe", "0": "o1z1"},
                "o1z1": {"0": "o1z0", "1": DEAD},
                "o1z0": {"0": "o1z1", "1": "odd1"},
                DEAD: {"0": DEAD, "1": DEAD},
            },
            "safe",
            {"safe", "odd1", "o1z0"},
        )
    if n == 4:  # no 000 substring
        return _dfa(
            "01",
            {
                "z0": {"0": "z1", "1": "z0"},
                "z1": {"0": "z2", "1": "z0"},
                "z2": {"0": DEAD, "1": "z0"},
                DEAD: {"0": DEAD, "1": DEAD},
            },
            "z0",
            {"z0", "z1", "z2"},
        )
    if n == 5:  # even number of 0s and even number of 1s
        table = {}
        for p0 in (0, 1):
            for p1 in (0, 1):
                table[f"{p0}{p1}"] = {"0": f"{1 - p0}{p1}", "1": f"{p0}{1 - p1}"}
        return _dfa("01", table, "00", {"00"})
    if n == 6:  # (#1s - #0s) divisible by 3
        table = {f"r{r}": {"0": f"r{(r - 1) % 3}", "1": f"r{(r + 1) % 3}"} for r in range(3)}
        return _dfa("01", table, "r0", {"r0"})
    if n == 7:  # 0*1*0*1*
        return _dfa(
            "01",
            {
                "a": {"0": "a", "1": "b"},
                "b": {"1": "b", "0": "c"},
                "c": {"0": "c", "1": "d"},
                "d": {"1": "d", "0": DEAD},
                DEAD: {"0": DEAD, "1": DEAD},
            },
            "a",
            {"a", "b", "c", "d"},
        )
    raise ValueError(f"no Tomita grammar {n}")


def depth_bounded_dfa(n):
    """D_n = (a D_{n-1} b)* as a depth counter capped at n, plus a dead state."""
    table = {}
    for d in range(n + 1):
        table[d] = {
            "a": d + 1 if d < n else DEAD,
            "b": d - 1 if d > 0 else DEAD,
        }
    table[DEAD] = {"a": DEAD, "b": DEAD}
    return _dfa("ab", table, 0, {0})


def unary_cycle_dfa(period):
    """(a^period)* over the unary alphabet {a}."""
    table = {i: {"a": (i + 1) % period} for i in range(period)}
    return _dfa("a", table, 0, {0})


def word_cycle_dfa(word):
    """(word)* for a fixed word, e.g. (abab)*."""
    alphabet = sorted(set(word))
    n = len(word)
    table = {}
    for i in range(n):
        table[i] = {s: DEAD for s in alphabet}
        table[i][word[i]] = (i + 1) % n
    table[DEAD] = {s: DEAD for s in alphabet}
    return _dfa(alphabet, table, 0, {0})


def parity_dfa():
    """Even number of 1s over {0,1}."""
    return _dfa(
        "01",
        {"even": {"0": "even", "1": "odd"}, "odd": {"0": "odd", "1": "even"}},
        "even",
        {"even"},
    )


def letter_chain_dfa(letters):
    """l1+ l2+ ... lm+ (each letter at least once, in order)."""
    m = len(letters)
    table = {}
    for i in range(m + 1):  # state i = "still owed letters[i:]", i==m done
        row = {s: DEAD for s in letters}
        if i < m:
            row[letters[i]] = i + 1
        if 0 < i < m:
            row[letters[i - 1]] = i
        if i == m:
            row[letters[m - 1]] = m
        table[i] = row
    table[DEAD] = {s: DEAD for s in letters}
    return _dfa(letters, table, 0, {m})


def ab_d_bc_dfa():
    """{a,b}* d {b,c}*."""
    return _dfa(
        "abcd",
        {
            "pre": {"a": "pre", "b": "pre", "c": DEAD, "d": "post"},
            "post": {"b": "post", "c": "post", "a": DEAD, "d": DEAD},
            DEAD: {s: DEAD for s in "abcd"},
        },
        "pre",
        {"post"},
    )


def suffix_02_dfa():
    """{0,1,2}* 0 2*: strings whose tail is a 0 followed by only 2s."""
    return _dfa(
        "012",
        {
            "no": {"0": "yes", "1": "no", "2": "no"},
            "yes": {"0": "yes", "1": "no", "2": "yes"},
        },
        "no",
        {"yes"},
    )


# ---------------------------------------------------------------------------
# the catalog
# ---------------------------------------------------------------------------

DYCK_PAIRS = [("[", "]"), ("(", ")"), ("{", "}"), ("<", ">"), ("⟦", "⟧"), ("⟨", "⟩")]

BOOLEXP3_OPS = (("∼", 1), ("+", 2), (">", 3))
BOOLEXP5_OPS = (("∼", 1), ("¬", 1), ("+", 2), ("∧", 2), (">", 3))
BOOL_VALUES = ("0", "1")


def bool_arities(ops):
    arities = {sym: r for sym, r in ops}
    for v in BOOL_VALUES:
        arities[v] = 0
    return arities


@dataclass(frozen=True)
class LanguageSpec:
    """One catalog entry: identity, recognizer, class tags, and semantics."""

    id: str
    alphabet: tuple
    recognizer: object
    tags: frozenset
    stepper_factory: object
    dot_depth: int = None
    description: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    def stepper(self):
        return self.stepper_factory()

    @property
    def symbols(self):
        """Target coordinate order: alphabet followed by EOS."""
        return self.alphabet + (EOS,)


def membership(lang, word):
    """True iff word is in the language (dispatches to the recognizer)."""
    allowed = set(lang.alphabet)
    for symbol in word:
        if symbol not in allowed:
            raise RejectedInput(f"symbol {symbol!r} not in {lang.id} alphabet")
    return lang.recognizer.accepts(word)


def legal_next(lang, prefix):
    """Legal next symbols (and possibly EOS) after a live prefix."""
    st = lang.stepper()
    for symbol in prefix:
        st.advance(symbol)
    return st.legal()


def brute_force_legal(lang, prefix, horizon):
    """Independent legal-next oracle by bounded continuation search.

    A symbol s is included iff some continuation of prefix+s of length at
    most `horizon` lands in the language; EOS is included iff the prefix
    itself is a member.  The search walks recognizer configurations
    (deduplicated breadth-first), which decides exactly the same question as
    enumerating all continuation strings but stays tractable for wide
    alphabets; configurations that provably cannot reach acceptance within
    the remaining budget are pruned with an admissible step-count bound.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    rec = lang.recognizer
    out = set()
    if membership(lang, prefix):
        out.add(EOS)
    if isinstance(rec, Dfa):
        base = rec.run(prefix)
        for s in lang.alphabet:
            if _dfa_reaches_accept(rec, rec.step(base, s), horizon):
                out.add(s)
    else:
        base = rec.run(prefix)
        for s in lang.alphabet:
            if _cm_reaches_accept(rec, rec.step(base, s), horizon):
                out.add(s)
    return frozenset(out)


def _dfa_reaches_accept(dfa, state, horizon):
    seen = {state}
    frontier = [state]
    for _ in range(horizon + 1):
        if any(q in dfa.accepting for q in frontier):
            return True
        nxt = []
        for q in frontier:
            for s in dfa.alphabet:
                q2 = dfa.transition[q, s]
                if q2 not in seen:
                    seen.add(q2)
                    nxt.append(q2)
        if not nxt:
            return False
        frontier = nxt
    return False


def _cm_search_hints(machine):
    """Cached facts used to prune the configuration search."""
    hints = getattr(machine, "_search_hints", None)
    if hints is not None:
        return hints
    ops = [op for ops in machine._update.values() for op in ops]
    has_reset = any(op == RESET for op in ops)
    max_add = max((abs(op) for op in ops if op != RESET), default=1) or 1
    single_counter = all(
        sum(1 for op in ops if op != 0) <= 1 for ops in machine._update.values()
    )
    zero_only_accept = all(not any(mask) for _, mask in machine.accept_mask)
    # states from which no accepting state is reachable at any counter value
    edges = {q: set() for q in machine.states}
    for (sym, state, mask), nxt in machine._transition.items():
        edges[state].add(nxt)
    maybe_live = {q for q, _ in machine.accept_mask}
    changed = True
    while changed:
        changed = False
        for q, outs in edges.items():
            if q not in maybe_live and outs & maybe_live:
                maybe_live.add(q)
                changed = True
    hints = (has_reset, max_add, single_counter, zero_only_accept, frozenset(maybe_live))
    machine._search_hints = hints
    return hints


def _cm_reaches_accept(machine, config, horizon):
    has_reset, max_add, single_counter, zero_only, live = _cm_search_hints(machine)

    def accepting(c):
        return (c.state, zero_mask(c.counters)) in machine.accept_mask

    def min_steps_left(counters):
        # admissible lower bound on steps needed before acceptance is possible
        if not zero_only or has_reset:
            return 0
        if single_counter:
            return sum(-(-abs(c) // max_add) for c in counters)
        return max((-(-abs(c) // max_add) for c in counters), default=0)

    seen = {config}
    frontier = [config]
    for depth in range(horizon + 1):
        if any(accepting(c) for c in frontier):
            return True
        budget = horizon - depth - 1
        if budget < 0:
            return False
        nxt = []
        for c in frontier:
            for s in machine.alphabet:
                c2 = machine.step(c, s)
                if c2 in seen or c2.state not in live:
                    continue
                if min_steps_left(c2.counters) > budget:
                    continue
                seen.add(c2)
                nxt.append(c2)
        if not nxt:
            return False
        frontier = nxt
    return False


def _spec(id, alphabet, recognizer, tags, stepper_factory, dot_depth=None, description="", **extra):
    return LanguageSpec(
        id=id,
        alphabet=tuple(alphabet),
        recognizer=recognizer,
        tags=frozenset(tags),
        stepper_factory=stepper_factory,
        dot_depth=dot_depth,
        description=description,
        extra=dict(extra),
    )


def make_shuffle(k, lang_id=None):
    if not 1 <= k <= len(DYCK_PAIRS):
        raise ValueError(f"shuffle width {k} unsupported")
    pairs = DYCK_PAIRS[:k]
    name = "Dyck-1" if k == 1 else f"Shuffle-{k}"
    return _spec(
        lang_id or (f"shuffle{k}" if k > 1 else "dyck1"),
        [s for p in pairs for s in p],
        shuffle_machine(pairs),
        {"counter"},
        lambda pairs=pairs: BracketStepper(pairs),
        description=f"{name}: each bracket type independently balanced",
        pairs=pairs,
    )


def make_boolexp(ops, lang_id):
    arities = bool_arities(ops)
    alphabet = tuple(sym for sym, _ in ops) + BOOL_VALUES
    return _spec(
        lang_id,
        alphabet,
        prefix_expr_machine(arities),
        {"counter"},
        lambda a=arities: PrefixExprStepper(a),
        description=f"prefix boolean expressions, operator arities {sorted(r for _, r in ops)}",
        arities=arities,
    )


def make_staircase(letters, lang_id):
    return _spec(
        lang_id,
        letters,
        staircase_machine(list(letters)),
        {"counter"},
        lambda l=tuple(letters): StaircaseStepper(l),
        description="^".join(letters) + " powers matched (n >= 1)",
    )


def make_dn(n):
    dfa = depth_bounded_dfa(n)
    return _spec(
        f"dn{n}",
        "ab",
        dfa,
        {"regular", "star-free"},
        lambda d=dfa: DfaStepper(d),
        dot_depth=n,
        description=f"D_{n}: bracket words of depth at most {n} over a/b",
    )


def _dfa_spec(id, alphabet, dfa, tags, dot_depth=None, description=""):
    return _spec(id, alphabet, dfa, tags, lambda d=dfa: DfaStepper(d), dot_depth, description)


def build_catalog():
    langs = [
        make_shuffle(1),
        make_shuffle(2),
        make_shuffle(4),
        make_shuffle(6),
        make_boolexp(BOOLEXP3_OPS, "boolexp3"),
        make_boolexp(BOOLEXP5_OPS, "boolexp5"),
        make_staircase("ab", "anbn"),
        make_staircase("abc", "anbncn"),
        make_staircase("abcd", "anbncndn"),
        _spec(
            "reset_dyck1",
            "[]#",
            reset_dyck_machine(),
            {"counter"},
            ResetDyckStepper,
            description="anything, then '#', then a Dyck-1 word; '#' resets",
        ),
    ]
    star_free = {1: True, 2: True, 3: False, 4: True, 5: False, 6: False, 7: True}
    for n in range(1, 8):
        tags = {"regular", "star-free" if star_free[n] else "non-star-free"}
        langs.append(
            _dfa_spec(
                f"tomita{n}",
                "01",
                tomita_dfa(n),
                tags,
                dot_depth=1 if star_free[n] else None,
                description=f"Tomita grammar {n}",
            )
        )
    langs += [make_dn(n) for n in (1, 2, 3, 4, 12)]
    langs += [
        _dfa_spec("parity", "01", parity_dfa(), {"regular", "non-star-free"},
                  description="even number of 1s"),
        _dfa_spec("aa_star", "a", unary_cycle_dfa(2), {"regular", "non-star-free"},
                  description="(aa)*"),
        _dfa_spec("aaaa_star", "a", unary_cycle_dfa(4), {"regular", "non-star-free"},
                  description="(aaaa)*"),
        _dfa_spec("abab_star", "ab", word_cycle_dfa("abab"), {"regular", "non-star-free"},
                  description="(abab)*"),
        _dfa_spec("abcde_plus", "abcde", letter_chain_dfa("abcde"), {"regular", "star-free"},
                  dot_depth=1, description="aa*bb*cc*dd*ee*"),
        _dfa_spec("ab_d_bc", "abcd", ab_d_bc_dfa(), {"regular", "star-free"},
                  dot_depth=1, description="{a,b}* d {b,c}*"),
        _dfa_spec("zero12", "012", suffix_02_dfa(), {"regular", "star-free"},
                  dot_depth=2, description="{0,1,2}* 0 2*"),
    ]
    return {lang.id: lang for lang in langs}


CATALOG = build_catalog()


def get_language(lang_id):
    try:
        return CATALOG[lang_id]
    except KeyError:
        raise KeyError(f"unknown language {lang_id!r}; known: {', '.join(sorted(CATALOG))}") from None


def class_label(lang):
    if "counter" in lang.tags:
        return "counter"
    kind = "star-free" if "star-free" in lang.tags else "non-star-free"
    if lang.dot_depth is not None:
        return f"{kind} (dot-depth {lang.dot_depth})"
    return kind

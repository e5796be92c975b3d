"""Counter machines and DFAs.

A k-counter machine reads one symbol at a time and updates a state plus k
unbounded integer counters.  The update and transition functions may consult
the counters only through their zero/nonzero mask.  Counter operations are
either "add m" (any integer m, including 0) or "reset to zero".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass


class RejectedInput(Exception):
    """Input symbol outside the machine/language alphabet."""


class MachineDefinitionError(Exception):
    """Machine pieces are inconsistent (non-total maps, bad shapes, ...)."""


#: Counter operation sentinel: reset the counter to zero.  All other
#: operations are plain integers meaning "add m".
RESET = "x0"


def zero_mask(counters):
    """Per-counter zero check: bit i is 0 iff counters[i] == 0, else 1."""
    return tuple(0 if c == 0 else 1 for c in counters)


def apply_op(value, op):
    if op == RESET:
        return 0
    return value + op


@dataclass(frozen=True)
class MachineConfig:
    """A machine configuration: current state plus counter vector."""

    state: object
    counters: tuple


def _all_masks(k):
    return list(itertools.product((0, 1), repeat=k)) if k else [()]


class CounterMachine:
    """General k-counter machine.

    `update(symbol, state, mask)` must return a length-k tuple of operations
    (an int to add, or RESET); `transition(symbol, state, mask)` the next
    state.  Both are evaluated over the full Sigma x Q x {0,1}^k domain at
    construction time, which checks totality and builds lookup tables.
    """

    def __init__(self, alphabet, states, start, k, update, transition, accept_mask):
        self.alphabet = tuple(alphabet)
        self.states = frozenset(states)
        self.start = start
        self.k = int(k)
        self.accept_mask = frozenset(accept_mask)
        if start not in self.states:
            raise MachineDefinitionError(f"start state {start!r} not in states")
        if self.k < 0:
            raise MachineDefinitionError("k must be >= 0")
        for state, mask in self.accept_mask:
            if state not in self.states or len(mask) != self.k:
                raise MachineDefinitionError(f"bad accept entry {(state, mask)!r}")

        self._update = {}
        self._transition = {}
        for sym in self.alphabet:
            for state in self.states:
                for mask in _all_masks(self.k):
                    ops = tuple(update(sym, state, mask))
                    if len(ops) != self.k:
                        raise MachineDefinitionError(
                            f"update({sym!r}, {state!r}, {mask}) has {len(ops)} ops, want {self.k}"
                        )
                    for op in ops:
                        if op != RESET and not isinstance(op, int):
                            raise MachineDefinitionError(f"bad counter op {op!r}")
                    nxt = transition(sym, state, mask)
                    if nxt not in self.states:
                        raise MachineDefinitionError(
                            f"transition({sym!r}, {state!r}, {mask}) -> unknown state {nxt!r}"
                        )
                    self._update[sym, state, mask] = ops
                    self._transition[sym, state, mask] = nxt

    @property
    def initial_config(self):
        return MachineConfig(self.start, (0,) * self.k)

    def step(self, config, symbol):
        if symbol not in self._alphabet_set():
            raise RejectedInput(f"symbol {symbol!r} not in alphabet {self.alphabet}")
        mask = zero_mask(config.counters)
        key = (symbol, config.state, mask)
        ops = self._update[key]
        counters = tuple(apply_op(c, op) for c, op in zip(config.counters, ops))
        return MachineConfig(self._transition[key], counters)

    def run(self, word):
        config = self.initial_config
        for symbol in word:
            config = self.step(config, symbol)
        return config

    def accepts(self, word):
        config = self.run(word)
        return (config.state, zero_mask(config.counters)) in self.accept_mask

    def _alphabet_set(self):
        cached = getattr(self, "_alpha_cache", None)
        if cached is None:
            cached = self._alpha_cache = frozenset(self.alphabet)
        return cached


def cm_step(machine, config, symbol):
    """One transition of a counter machine; see CounterMachine.step."""
    return machine.step(config, symbol)


def cm_accepts(machine, word):
    """True iff the final (state, zero-mask) lies in the acceptance mask."""
    return machine.accepts(word)


class StatelessCounterMachine:
    """Counter machine whose update and transition depend only on the symbol.

    Counters are incremented by per-symbol integer vectors (no resets); the
    state after a nonempty word is a function of its last symbol alone.
    Acceptance still checks the final (state, zero-mask) pair.
    """

    def __init__(self, alphabet, start, k, update, transition, accept_mask):
        self.alphabet = tuple(alphabet)
        self.start = start
        self.k = int(k)
        self.update = {s: tuple(update[s]) for s in self.alphabet}
        self.transition = {s: transition[s] for s in self.alphabet}
        self.accept_mask = frozenset(accept_mask)
        for s in self.alphabet:
            if len(self.update[s]) != self.k:
                raise MachineDefinitionError(f"update[{s!r}] has wrong arity")
            for m in self.update[s]:
                if not isinstance(m, int):
                    raise MachineDefinitionError("stateless updates are +m only")
        self.states = frozenset(self.transition.values()) | {start}

    def accepts(self, word):
        counters = [0] * self.k
        state = self.start
        for symbol in word:
            if symbol not in self.update:
                raise RejectedInput(f"symbol {symbol!r} not in alphabet {self.alphabet}")
            inc = self.update[symbol]
            for i in range(self.k):
                counters[i] += inc[i]
            state = self.transition[symbol]
        return (state, zero_mask(counters)) in self.accept_mask

    def as_counter_machine(self):
        """Embed into a general CounterMachine (state/mask arguments ignored)."""
        return CounterMachine(
            alphabet=self.alphabet,
            states=self.states,
            start=self.start,
            k=self.k,
            update=lambda sym, state, mask: self.update[sym],
            transition=lambda sym, state, mask: self.transition[sym],
            accept_mask=self.accept_mask,
        )


class Dfa:
    """Deterministic finite automaton with derived dead-state set.

    A state is dead iff no accepting state is reachable from it; dead states
    are computed by reverse reachability from the accepting set.
    """

    def __init__(self, alphabet, states, start, transition, accepting):
        self.alphabet = tuple(alphabet)
        self.states = frozenset(states)
        self.start = start
        self.transition = dict(transition)
        self.accepting = frozenset(accepting)
        if start not in self.states:
            raise MachineDefinitionError(f"start state {start!r} not in states")
        if not self.accepting <= self.states:
            raise MachineDefinitionError("accepting states not a subset of states")
        for state in self.states:
            for sym in self.alphabet:
                if (state, sym) not in self.transition:
                    raise MachineDefinitionError(f"missing transition ({state!r}, {sym!r})")
                if self.transition[state, sym] not in self.states:
                    raise MachineDefinitionError(f"unknown target for ({state!r}, {sym!r})")
        self.dead = frozenset(self.states - self._alive_states())

    def _alive_states(self):
        # reverse reachability from accepting states
        reverse = {s: set() for s in self.states}
        for (state, sym), nxt in self.transition.items():
            reverse[nxt].add(state)
        alive = set(self.accepting)
        frontier = list(alive)
        while frontier:
            here = frontier.pop()
            for prev in reverse[here]:
                if prev not in alive:
                    alive.add(prev)
                    frontier.append(prev)
        return alive

    def step(self, state, symbol):
        if symbol not in self._alphabet_set():
            raise RejectedInput(f"symbol {symbol!r} not in alphabet {self.alphabet}")
        return self.transition[state, symbol]

    def run(self, word):
        state = self.start
        for symbol in word:
            state = self.step(state, symbol)
        return state

    def accepts(self, word):
        return self.run(word) in self.accepting

    def _alphabet_set(self):
        cached = getattr(self, "_alpha_cache", None)
        if cached is None:
            cached = self._alpha_cache = frozenset(self.alphabet)
        return cached

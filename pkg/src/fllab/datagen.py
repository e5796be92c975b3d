"""Positive-sample generation, dataset assembly, and per-step targets.

Datasets hold a training split plus disjoint test bins of increasing length;
every string is a member of its language and every prefix position carries a
k-hot row over the alphabet plus an end-of-sequence coordinate marking the
exact set of legal next symbols.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import CATALOG, EOS, get_language, membership
from .machines import Dfa


class GenerationError(Exception):
    """Sampling budget exhausted or an impossible window was requested."""


@dataclass(frozen=True)
class PcfgDyckParams:
    """Rule probabilities for S -> (S) | SS | eps."""

    p: float = 0.5
    q: float = 0.25

    def __post_init__(self):
        if not (0 < self.p < 1 and 0 < self.q < 1 and self.p + self.q < 1):
            raise ValueError(f"invalid PCFG probabilities p={self.p} q={self.q}")


def _expand_dyck(params, rng, max_length, open_sym="[", close_sym="]"):
    """One PCFG expansion; returns None as soon as the word would overflow."""
    out = []
    stack = ["S"]
    while stack:
        top = stack.pop()
        if top != "S":
            out.append(top)
            if len(out) > max_length:
                return None
            continue
        r = rng.random()
        if r < params.p:
            stack += [close_sym, "S", open_sym]
        elif r < params.p + params.q:
            stack += ["S", "S"]
        # else: S -> eps
    return "".join(out)


def sample_dyck1(params, rng, max_length, open_sym="[", close_sym="]", budget=10_000):
    """Sample one Dyck-1 word of length <= max_length from the PCFG."""
    for _ in range(budget):
        word = _expand_dyck(params, rng, max_length, open_sym, close_sym)
        if word is not None:
            return word
    raise GenerationError(f"no Dyck-1 word of length <= {max_length} in {budget} tries")


def shuffle_words(u, v):
    """All interleavings of u and v, preserving each word's internal order."""
    memo = {}

    def rec(i, j):
        if (i, j) in memo:
            return memo[i, j]
        if i == len(u):
            result = {v[j:]}
        elif j == len(v):
            result = {u[i:]}
        else:
            result = {u[i] + w for w in rec(i + 1, j)} | {v[j] + w for w in rec(i, j + 1)}
        memo[i, j] = result
        return result

    return rec(0, 0)


def random_interleave(rng, words):
    """One uniform interleaving of several words."""
    remaining = [list(w) for w in words if w]
    out = []
    total = sum(len(w) for w in remaining)
    for _ in range(total):
        weights = np.array([len(w) for w in remaining], dtype=float)
        idx = rng.choice(len(remaining), p=weights / weights.sum())
        out.append(remaining[idx].pop(0))
        if not remaining[idx]:
            remaining.pop(idx)
    return "".join(out)


# ---------------------------------------------------------------------------
# per-family samplers
# ---------------------------------------------------------------------------


def _sample_shuffle(lang, rng, lo, hi, params=PcfgDyckParams(), budget=10_000):
    pairs = lang.extra["pairs"]
    for _ in range(budget):
        words = [sample_dyck1(params, rng, hi, o, c) for o, c in pairs]
        if lo <= sum(len(w) for w in words) <= hi:
            return random_interleave(rng, words)
    raise GenerationError(f"{lang.id}: no sample hit window [{lo}, {hi}] in {budget} tries")


def _sample_boolexp(lang, rng, lo, hi, budget=10_000):
    arities = lang.extra["arities"]
    operators = [s for s, r in arities.items() if r > 0]
    values = [s for s, r in arities.items() if r == 0]
    mean_arity = sum(arities[s] for s in operators) / len(operators)
    p_val = 1.0 - 1.0 / mean_arity  # keeps the expansion near-critical
    for _ in range(budget):
        out = []
        need = 1
        while need and len(out) <= hi:
            if rng.random() < p_val:
                out.append(values[rng.integers(len(values))])
                need -= 1
            else:
                op = operators[rng.integers(len(operators))]
                out.append(op)
                need += arities[op] - 1
        if need == 0 and lo <= len(out) <= hi:
            return "".join(out)
    raise GenerationError(f"{lang.id}: no sample hit window [{lo}, {hi}] in {budget} tries")


def _sample_staircase(lang, rng, lo, hi):
    m = len(lang.alphabet)
    n_lo = max(1, -(-lo // m))
    n_hi = hi // m
    if n_hi < n_lo:
        raise GenerationError(f"{lang.id}: window [{lo}, {hi}] holds no word")
    n = int(rng.integers(n_lo, n_hi + 1))
    return "".join(sym * n for sym in lang.alphabet)


def _dfa_reach_table(dfa, max_len):
    """reach[state][r]: an accepting state is reachable in exactly r steps."""
    states = sorted(dfa.states, key=repr)
    index = {s: i for i, s in enumerate(states)}
    reach = np.zeros((len(states), max_len + 1), dtype=bool)
    for s in dfa.accepting:
        reach[index[s], 0] = True
    for r in range(1, max_len + 1):
        for s in states:
            reach[index[s], r] = any(
                reach[index[dfa.transition[s, a]], r - 1] for a in dfa.alphabet
            )
    return index, reach


def _sample_dfa_path(lang, rng, lo, hi):
    dfa = lang.recognizer
    cache = lang.extra.setdefault("_reach_cache", {})
    if hi not in cache:
        cache[hi] = _dfa_reach_table(dfa, hi)
    index, reach = cache[hi]
    lengths = [r for r in range(lo, hi + 1) if reach[index[dfa.start], r]]
    if not lengths:
        raise GenerationError(f"{lang.id}: window [{lo}, {hi}] holds no word")
    length = lengths[rng.integers(len(lengths))]
    out = []
    state = dfa.start
    for remaining in range(length, 0, -1):
        options = [a for a in dfa.alphabet if reach[index[dfa.transition[state, a]], remaining - 1]]
        sym = options[rng.integers(len(options))]
        out.append(sym)
        state = dfa.transition[state, sym]
    return "".join(out)


def _sample_reset_dyck(lang, rng, lo, hi, params=PcfgDyckParams(), budget=10_000):
    for _ in range(budget):
        length = int(rng.integers(max(lo, 1), hi + 1))
        tail = sample_dyck1(params, rng, length - 1)
        pre_len = length - 1 - len(tail)
        prefix = "".join(lang.alphabet[i] for i in rng.integers(0, 3, size=pre_len))
        return prefix + "#" + tail
    raise GenerationError(f"{lang.id}: sampling failed")


def sample_language(lang, rng, window, budget=10_000):
    """One member word with length inside the [lo, hi] window."""
    lo, hi = window
    if hi < lo or hi < 1:
        raise GenerationError(f"empty window [{lo}, {hi}]")
    if "pairs" in lang.extra:
        return _sample_shuffle(lang, rng, lo, hi, budget=budget)
    if "arities" in lang.extra:
        return _sample_boolexp(lang, rng, lo, hi, budget=budget)
    if lang.id == "reset_dyck1":
        return _sample_reset_dyck(lang, rng, lo, hi, budget=budget)
    if isinstance(lang.recognizer, Dfa):
        return _sample_dfa_path(lang, rng, lo, hi)
    return _sample_staircase(lang, rng, lo, hi)


def enumerate_language(lang, window, cap=500_000):
    """All member words with length in the window, ascending by length.

    Walks live prefixes breadth-first via the language stepper; intended for
    sparse languages only and errors out once the frontier exceeds `cap`.
    """
    lo, hi = window
    words = []
    frontier = [("", lang.stepper())]
    for length in range(1, hi + 1):
        nxt = []
        for prefix, st in frontier:
            for sym in sorted(st.legal() - {EOS}):
                st2 = copy.deepcopy(st)
                st2.advance(sym)
                nxt.append((prefix + sym, st2))
        if len(nxt) > cap:
            raise GenerationError(
                f"{lang.id}: enumeration frontier exceeds {cap} at length {length}; "
                "use sample_language instead"
            )
        frontier = nxt
        if length >= lo:
            words += sorted(p for p, st in frontier if EOS in st.legal())
        if not frontier:
            break
    return words


# ---------------------------------------------------------------------------
# targets
# ---------------------------------------------------------------------------


def target_matrix(lang, word, check_membership=True):
    """Per-prefix k-hot legality rows; row t covers prefix word[:t+1]."""
    if check_membership and not membership(lang, word):
        raise ValueError(f"{word!r} is not a member of {lang.id}")
    symbols = lang.symbols
    col = {s: i for i, s in enumerate(symbols)}
    rows = np.zeros((len(word), len(symbols)), dtype=np.uint8)
    st = lang.stepper()
    for t, sym in enumerate(word):
        st.advance(sym)
        for s in st.legal():
            rows[t, col[s]] = 1
    return rows


def targets_for(lang, word):
    """Spec-facing alias for target_matrix (membership is always checked)."""
    return target_matrix(lang, word, check_membership=True)


# ---------------------------------------------------------------------------
# dataset assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DatasetSpec:
    """Split sizes and length windows, one per language (Table-6 style)."""

    mode: str  # "sample" | "enumerate"
    train_size: int
    train_range: tuple
    bin_size: int
    num_bins: int
    bin_width: int

    def bin_range(self, i):
        lo, hi = self.train_range
        if i == 0:
            return (lo, hi)
        return (hi + (i - 1) * self.bin_width + 2, hi + i * self.bin_width)

    def bin_ranges(self):
        return [self.bin_range(i) for i in range(self.num_bins)]


DATASET_SPECS = {
    "dyck1": DatasetSpec("sample", 10000, (2, 50), 2000, 3, 50),
    "shuffle2": DatasetSpec("sample", 10000, (2, 50), 2000, 3, 50),
    "shuffle4": DatasetSpec("sample", 10000, (2, 100), 2000, 3, 50),
    "shuffle6": DatasetSpec("sample", 10000, (2, 100), 2000, 3, 50),
    "boolexp3": DatasetSpec("sample", 10000, (2, 50), 2000, 3, 50),
    "boolexp5": DatasetSpec("sample", 10000, (2, 50), 2000, 3, 50),
    "anbn": DatasetSpec("enumerate", 50, (2, 100), 50, 3, 100),
    "anbncn": DatasetSpec("enumerate", 50, (3, 150), 50, 3, 150),
    "anbncndn": DatasetSpec("enumerate", 50, (4, 200), 50, 3, 200),
    "tomita1": DatasetSpec("enumerate", 50, (2, 50), 100, 2, 50),
    "tomita2": DatasetSpec("enumerate", 25, (2, 50), 50, 2, 50),
    "tomita3": DatasetSpec("sample", 10000, (2, 50), 2000, 2, 50),
    "tomita4": DatasetSpec("sample", 10000, (2, 50), 2000, 2, 50),
    "tomita5": DatasetSpec("sample", 10000, (2, 50), 2000, 2, 50),
    "tomita6": DatasetSpec("sample", 10000, (2, 50), 2000, 2, 50),
    "tomita7": DatasetSpec("sample", 10000, (2, 50), 2000, 2, 50),
    "abcde_plus": DatasetSpec("sample", 10000, (5, 200), 1000, 2, 100),
    "ab_d_bc": DatasetSpec("sample", 10000, (1, 50), 2000, 2, 50),
    "zero12": DatasetSpec("sample", 10000, (2, 50), 2000, 2, 50),
    "dn1": DatasetSpec("enumerate", 25, (2, 50), 50, 2, 50),
    "dn2": DatasetSpec("sample", 10000, (2, 100), 2000, 2, 100),
    "dn3": DatasetSpec("sample", 10000, (2, 100), 2000, 2, 100),
    "dn4": DatasetSpec("sample", 10000, (2, 100), 2000, 2, 100),
    "dn12": DatasetSpec("sample", 10000, (2, 100), 2000, 2, 100),
    "parity": DatasetSpec("sample", 10000, (2, 50), 2000, 2, 50),
    "aa_star": DatasetSpec("enumerate", 250, (2, 500), 50, 2, 100),
    "aaaa_star": DatasetSpec("enumerate", 125, (4, 500), 25, 2, 100),
    "abab_star": DatasetSpec("enumerate", 125, (4, 500), 25, 2, 100),
    "reset_dyck1": DatasetSpec("sample", 10000, (2, 50), 2000, 2, 50),
}


# Shorter windows for the periodic unary-ish languages at desk scale: the
# full [2, 500] training range makes attention quadratically expensive while
# the scheme-dependent generalization contrast is already visible at 200.
DESK_RANGE_OVERRIDES = {
    "aa_star": DatasetSpec("enumerate", 50, (2, 100), 50, 2, 100),
    "aaaa_star": DatasetSpec("enumerate", 25, (4, 100), 25, 2, 100),
    "abab_star": DatasetSpec("enumerate", 25, (4, 100), 25, 2, 100),
}


def dataset_spec(lang_id, profile="full", train_cap=2500, bin_cap=300):
    """Spec for a language; the 'desk' profile caps split sizes for fast runs."""
    spec = DATASET_SPECS[lang_id]
    if profile == "full":
        return spec
    if profile == "desk":
        spec = DESK_RANGE_OVERRIDES.get(lang_id, spec)
        return DatasetSpec(
            spec.mode,
            min(spec.train_size, train_cap),
            spec.train_range,
            min(spec.bin_size, bin_cap),
            spec.num_bins,
            spec.bin_width,
        )
    raise ValueError(f"unknown profile {profile!r}")


@dataclass
class DatasetBin:
    lo: int
    hi: int
    items: list  # of (word, target matrix)


@dataclass
class Dataset:
    language: str
    symbols: tuple
    train: list  # of (word, target matrix)
    bins: list  # of DatasetBin
    metadata: dict = field(default_factory=dict)


def _distinct_samples(lang, rng, window, count, budget_factor=200):
    seen = {}
    attempts = 0
    budget = max(1000, budget_factor * count)
    while len(seen) < count and attempts < budget:
        word = sample_language(lang, rng, window)
        seen.setdefault(word, None)
        attempts += 1
    if len(seen) < count:
        raise GenerationError(
            f"{lang.id}: only {len(seen)} distinct strings found in {window} "
            f"(wanted {count})"
        )
    return list(seen)


def build_dataset(lang, spec, seed):
    """Assemble a Dataset per the spec; deterministic in (spec, seed)."""
    if isinstance(lang, str):
        lang = get_language(lang)
    rng = np.random.default_rng(seed)

    if spec.mode == "enumerate":
        members = enumerate_language(lang, spec.train_range)
        train_words = members[: spec.train_size]
    else:
        train_words = [
            sample_language(lang, rng, spec.train_range) for _ in range(spec.train_size)
        ]

    bins = []
    for i in range(spec.num_bins):
        lo, hi = spec.bin_range(i)
        if spec.mode == "enumerate":
            members = enumerate_language(lang, (lo, hi))
            if len(members) > spec.bin_size:
                pick = rng.choice(len(members), size=spec.bin_size, replace=False)
                members = [members[j] for j in sorted(pick)]
            bin_words = members
        else:
            bin_words = _distinct_samples(lang, rng, (lo, hi), spec.bin_size)
        bins.append(DatasetBin(lo, hi, [(w, target_matrix(lang, w)) for w in bin_words]))

    train = [(w, target_matrix(lang, w)) for w in train_words]
    metadata = {
        "language": lang.id,
        "seed": int(seed),
        "spec": {
            "mode": spec.mode,
            "train_size": spec.train_size,
            "train_range": list(spec.train_range),
            "bin_size": spec.bin_size,
            "num_bins": spec.num_bins,
            "bin_width": spec.bin_width,
        },
        "counts": {"train": len(train), **{f"bin{i}": len(b.items) for i, b in enumerate(bins)}},
        "symbols": list(lang.symbols),
    }
    return Dataset(lang.id, lang.symbols, train, bins, metadata)


# ---------------------------------------------------------------------------
# on-disk format: JSONL splits plus a manifest with SHA-256 digests
# ---------------------------------------------------------------------------


def _write_split(path, items):
    with open(path, "w", encoding="utf-8") as fh:
        for word, targets in items:
            rec = {"input": word, "targets": targets.tolist(), "length": len(word)}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _read_split(path):
    items = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            items.append((rec["input"], np.array(rec["targets"], dtype=np.uint8)))
    return items


def write_dataset(dataset, outdir):
    """Write train/bin JSONL files and a manifest; returns the manifest."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    splits = {"train": dataset.train}
    for i, b in enumerate(dataset.bins):
        splits[f"bin{i}"] = b.items
    manifest = dict(dataset.metadata)
    manifest["bins"] = [{"lo": b.lo, "hi": b.hi} for b in dataset.bins]
    manifest["splits"] = {}
    for name, items in splits.items():
        digest = _write_split(outdir / f"{name}.jsonl", items)
        manifest["splits"][name] = {
            "path": f"{name}.jsonl",
            "count": len(items),
            "sha256": digest,
        }
    with open(outdir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, ensure_ascii=False)
    return manifest


def load_dataset(outdir):
    outdir = Path(outdir)
    with open(outdir / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    lang = get_language(manifest["language"])
    train = _read_split(outdir / manifest["splits"]["train"]["path"])
    bins = []
    for i, rng_ in enumerate(manifest["bins"]):
        items = _read_split(outdir / manifest["splits"][f"bin{i}"]["path"])
        bins.append(DatasetBin(rng_["lo"], rng_["hi"], items))
    return Dataset(lang.id, lang.symbols, train, bins, manifest)

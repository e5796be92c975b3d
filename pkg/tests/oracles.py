"""Independent membership oracles for exhaustive agreement tests.

Implemented straight from the grammar/regular-expression definitions, on
purpose without touching the package's automata.
"""

import re


def dyck1(word):
    depth = 0
    for s in word:
        depth += 1 if s == "[" else -1
        if depth < 0:
            return False
    return depth == 0


def shuffle(word, pairs):
    depths = [0] * len(pairs)
    idx = {}
    for j, (o, c) in enumerate(pairs):
        idx[o] = (j, 1)
        idx[c] = (j, -1)
    for s in word:
        j, d = idx[s]
        depths[j] += d
        if depths[j] < 0:
            return False
    return all(d == 0 for d in depths)


def prefix_expression(word, arities):
    """Classical characterization: owed-operand count stays positive on
    every proper prefix and ends at exactly zero."""
    need = 1
    for i, s in enumerate(word):
        if need == 0:
            return False
        need += arities[s] - 1
    return need == 0 and len(word) > 0


def staircase(word, letters):
    n = len(word) // len(letters)
    if n < 1 or len(word) != n * len(letters):
        return False
    return word == "".join(l * n for l in letters)


def reset_dyck1(word):
    if "#" not in word:
        return False
    return dyck1(word[word.rindex("#") + 1 :])


def tomita3(word):
    """Odd runs of 1s are never immediately followed by odd runs of 0s."""
    runs = [(ch, len(m.group())) for m in re.finditer(r"0+|1+", word) for ch in [m.group()[0]]]
    for (ch1, n1), (ch2, n2) in zip(runs, runs[1:]):
        if ch1 == "1" and n1 % 2 == 1 and ch2 == "0" and n2 % 2 == 1:
            return False
    return True


def _full_match(pattern):
    compiled = re.compile(pattern)
    return lambda w: compiled.fullmatch(w) is not None


def dn_regex(n):
    pattern = ""
    for _ in range(n):
        pattern = f"(?:a{pattern}b)*"
    return _full_match(pattern)


REGULAR = {
    "tomita1": _full_match(r"1*"),
    "tomita2": _full_match(r"(?:10)*"),
    "tomita3": tomita3,
    "tomita4": lambda w: "000" not in w,
    "tomita5": lambda w: w.count("0") % 2 == 0 and w.count("1") % 2 == 0,
    "tomita6": lambda w: (w.count("1") - w.count("0")) % 3 == 0,
    "tomita7": _full_match(r"0*1*0*1*"),
    "parity": lambda w: w.count("1") % 2 == 0,
    "aa_star": _full_match(r"(?:aa)*"),
    "aaaa_star": _full_match(r"(?:aaaa)*"),
    "abab_star": _full_match(r"(?:abab)*"),
    "zero12": _full_match(r"[012]*02*"),
    "abcde_plus": _full_match(r"a+b+c+d+e+"),
    "ab_d_bc": _full_match(r"[ab]*d[bc]*"),
    "dn1": dn_regex(1),
    "dn2": dn_regex(2),
    "dn3": dn_regex(3),
    "dn4": dn_regex(4),
    "dn12": dn_regex(12),
}

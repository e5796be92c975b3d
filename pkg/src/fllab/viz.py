"""Visualization exports: attention-output series vs counter ratios,
attention heatmap data, per-symbol value vectors, positional traces."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .catalog import get_language
from .neural.models import sinusoidal_table


def counter_ratio_series(lang, word):
    """Per-step counter/length ratios, or None for languages without counters."""
    st = lang.stepper()
    rows = []
    for t, sym in enumerate(word, start=1):
        st.advance(sym)
        c = st.counters()
        if c is None:
            return None
        rows.append([v / t for v in c])
    return np.array(rows) if rows else None


def attention_entropy_ratio(weights, lengths):
    """Mean entropy of attention rows relative to the uniform maximum.

    `weights` is (B, H, T, T); rows with fewer than two visible positions
    carry no entropy and are skipped.
    """
    total, count = 0.0, 0
    b, h, t_len, _ = weights.shape
    for r in range(b):
        for i in range(1, int(lengths[r])):
            rows = weights[r, :, i, : i + 1]
            p = np.clip(rows, 1e-12, 1.0)
            ent = -(p * np.log(p)).sum(axis=1)
            total += float((ent / np.log(i + 1)).sum())
            count += h
    return total / max(count, 1)


def value_vectors(model, layer=0):
    """Layer-`layer` value vector per vocabulary symbol (masking-only path:
    the attention input is the embedding itself)."""
    emb = model.params["embed"].data
    wv = model.params[f"l{layer}.wv"].data
    bv = model.params[f"l{layer}.bv"].data
    return {sym: emb[i] @ wv + bv for i, sym in enumerate(model.config.vocab)}


def value_magnitude_by_arity(model, lang):
    """Mean |value vector| per operator arity (prefix-expression languages)."""
    arities = lang.extra.get("arities")
    if not arities:
        raise ValueError(f"{lang.id} has no operator arities")
    vv = value_vectors(model)
    out = {}
    for sym, r in arities.items():
        out.setdefault(r, []).append(float(np.abs(vv[sym]).max()))
    return {r: float(np.mean(v)) for r, v in out.items()}


def export_visualization(model, lang, words, outdir, heatmap_words=3):
    """Write the visualization bundle; returns the summary manifest.

    Files: attention_output.csv (per-step layer-0 attention-block outputs
    next to counter/length ratios), pearson.csv, attention_weights.csv,
    value_vectors.csv, positional.csv (for schemes with a positional table),
    and manifest.json with best |Pearson r| per counter.
    """
    if isinstance(lang, str):
        lang = get_language(lang)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    d_model = model.params["embed"].data.shape[1]

    coord_series = [[] for _ in range(d_model)]
    ratio_series = None
    entropy_num, entropy_den = 0.0, 0
    out_rows = []
    heat_rows = []
    for w_idx, word in enumerate(words):
        collect = {}
        tokens = model.tokenize(word)[None, :]
        model.forward_tokens(tokens, collect=collect)
        attn = collect["l0.attn_out"][0]  # (T, d)
        ratios = counter_ratio_series(lang, word)
        if ratios is not None:
            ratio_series = ratio_series if ratio_series is not None else [[] for _ in range(ratios.shape[1])]
            for j in range(ratios.shape[1]):
                ratio_series[j].extend(ratios[:, j].tolist())
        for t in range(len(word)):
            for j in range(d_model):
                coord_series[j].append(float(attn[t, j]))
            out_rows.append(
                [w_idx, t + 1, word[t]]
                + [f"{attn[t, j]:.6g}" for j in range(d_model)]
                + ([f"{r:.6g}" for r in ratios[t]] if ratios is not None else [])
            )
        weights = collect["l0.weights"]
        entropy_num += attention_entropy_ratio(weights, [len(word)]) * max(len(word) - 1, 0)
        entropy_den += max(len(word) - 1, 0)
        if w_idx < heatmap_words:
            b, h, t_len, _ = weights.shape
            for head in range(h):
                for i in range(len(word)):
                    for j in range(i + 1):
                        heat_rows.append([w_idx, 0, head, i + 1, j + 1, f"{weights[0, head, i, j]:.6g}"])

    n_counters = len(ratio_series) if ratio_series else 0
    pearson = np.zeros((d_model, n_counters))
    for j in range(n_counters):
        for c in range(d_model):
            sd = np.std(coord_series[c])
            pearson[c, j] = (
                0.0 if sd == 0 else float(np.corrcoef(coord_series[c], ratio_series[j])[0, 1])
            )
    best_r = [float(np.abs(pearson[:, j]).max()) for j in range(n_counters)]

    header = ["word", "step", "symbol"] + [f"coord{j}" for j in range(d_model)]
    header += [f"ratio{j}" for j in range(n_counters)]
    _write_csv(outdir / "attention_output.csv", header, out_rows)
    _write_csv(
        outdir / "pearson.csv",
        ["coord", "counter", "r"],
        [[c, j, f"{pearson[c, j]:.6g}"] for c in range(d_model) for j in range(n_counters)],
    )
    _write_csv(
        outdir / "attention_weights.csv",
        ["word", "layer", "head", "query", "key", "weight"],
        heat_rows,
    )
    vv = value_vectors(model)
    _write_csv(
        outdir / "value_vectors.csv",
        ["symbol"] + [f"coord{j}" for j in range(d_model)],
        [[sym] + [f"{x:.6g}" for x in vec] for sym, vec in vv.items()],
    )
    scheme = model.config.scheme
    pos_rows = []
    if scheme == "trainable":
        table = model.params["pos_table"].data
        pos_rows = [[p + 1] + [f"{x:.6g}" for x in table[p]] for p in range(min(64, len(table)))]
    elif scheme in ("absolute", "cos"):
        table = (
            sinusoidal_table(64, d_model)
            if scheme == "absolute"
            else np.repeat(np.cos(np.arange(1, 65) * np.pi)[:, None], d_model, axis=1)
        )
        pos_rows = [[p + 1] + [f"{x:.6g}" for x in table[p]] for p in range(64)]
    _write_csv(outdir / "positional.csv", ["position"] + [f"coord{j}" for j in range(d_model)], pos_rows)

    manifest = {
        "language": lang.id,
        "words": len(words),
        "scheme": scheme,
        "best_pearson_abs": best_r,
        "attention_entropy_ratio": entropy_num / max(entropy_den, 1),
        "files": [
            "attention_output.csv",
            "pearson.csv",
            "attention_weights.csv",
            "value_vectors.csv",
            "positional.csv",
        ],
    }
    with open(outdir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)

"""Regenerate result tables (CSV) from stored grid-search runs.

Expects a results directory with one subdirectory per grid search, each
holding an index.json plus run_*.json files as written by grid_search.
Rows are long-format: one per (language, model variant, bin).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .catalog import CATALOG, class_label

TABLE_FILES = {
    "counter": "table_counter_languages.csv",
    "regular": "table_regular_languages.csv",
    "positional": "table_positional_encodings.csv",
    "reset": "table_reset_dyck.csv",
}

HEADER = [
    "language",
    "class",
    "dot_depth",
    "variant",
    "bin",
    "bin_range",
    "best_accuracy",
    "top5_mean",
    "runs",
]


def _variant(config):
    if config.get("kind") == "lstm":
        return f"lstm({config.get('hidden')}x{config.get('layers')})"
    scheme = config.get("scheme", "masking")
    res = "" if config.get("residual", True) else ",nores"
    return f"transformer/{scheme}(L{config.get('layers')}{res})"


def _group_key(language, config):
    if config.get("kind") == "lstm":
        return (language, "lstm")
    res = "" if config.get("residual", True) else ",nores"
    if language == "reset_dyck1":
        return (language, f"transformer/{config.get('scheme')}(L{config.get('layers')}{res})")
    return (language, f"transformer/{config.get('scheme')}{res}")


def collect_runs(results_dir):
    """All stored runs: list of (language, config, bin_accuracy, bins)."""
    runs = []
    missing = []
    for index_path in sorted(Path(results_dir).glob("**/index.json")):
        with open(index_path, encoding="utf-8") as fh:
            index = json.load(fh)
        for name in index["runs"]:
            run_path = index_path.parent / name
            if not run_path.exists():
                missing.append(str(run_path))
                continue
            with open(run_path, encoding="utf-8") as fh:
                run = json.load(fh)
            runs.append((run["language"], run["config"], run["bin_accuracy"], index["bins"]))
    return runs, missing


def report(results_dir, out_dir):
    """Write the table CSVs; returns {table_name: row_count} plus missing files."""
    runs, missing = collect_runs(results_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    groups = {}
    for language, config, bins_acc, bins in runs:
        key = _group_key(language, config)
        groups.setdefault(key, {"accs": [], "bins": bins})["accs"].append(bins_acc)

    rows_by_table = {name: [] for name in TABLE_FILES}
    for (language, variant), data in sorted(groups.items()):
        lang = CATALOG.get(language)
        accs = np.array(data["accs"])
        label = class_label(lang) if lang else ""
        depth = lang.dot_depth if lang and lang.dot_depth is not None else ""
        for b in range(accs.shape[1]):
            col = sorted(accs[:, b], reverse=True)
            rng = data["bins"][b] if b < len(data["bins"]) else {}
            row = [
                language,
                label,
                depth,
                variant,
                b,
                f"[{rng.get('lo', '?')}, {rng.get('hi', '?')}]",
                f"{col[0]:.1f}",
                f"{np.mean(col[:5]):.1f}",
                len(col),
            ]
            if language == "reset_dyck1":
                rows_by_table["reset"].append(row)
            elif language in ("aa_star", "aaaa_star", "abab_star"):
                rows_by_table["positional"].append(row)
            elif lang is not None and "counter" in lang.tags:
                rows_by_table["counter"].append(row)
            else:
                rows_by_table["regular"].append(row)

    counts = {}
    for name, filename in TABLE_FILES.items():
        with open(out_dir / filename, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(HEADER)
            writer.writerows(rows_by_table[name])
        counts[filename] = len(rows_by_table[name])
    return counts, missing

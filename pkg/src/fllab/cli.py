"""Command-line entry point: generate, train, grid, verify, viz, report.

All randomness flows from --seed; flags override values in an optional JSON
config file (unknown config keys are rejected).  Exit codes: 0 success,
1 verification/acceptance failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

import numpy as np

from . import datagen, kernels, profiles
from .catalog import CATALOG, class_label, get_language, shuffle_stateless_machine
from .constructions import (
    build_boolexp,
    build_shuffle_dyck,
    build_rcl,
    check_masking_constancy,
    check_reset_invariance,
    encode_words,
)
from .harness import evaluate_bins, grid_search, train
from .neural import TransformerConfig, make_model
from .neural.models import _ModelBase
from .report import report as make_report
from .viz import export_visualization


class UsageError(Exception):
    pass


def _catalog_epilog():
    lines = ["languages:"]
    for lang_id in sorted(CATALOG):
        lang = CATALOG[lang_id]
        lines.append(f"  {lang_id:12s} {class_label(lang):26s} {lang.description}")
    return "\n".join(lines)


def _apply_config_file(args, parser_dests):
    if not getattr(args, "config", None):
        return args
    path = Path(args.config)
    if not path.exists():
        raise UsageError(f"config file {path} not found")
    with open(path, encoding="utf-8") as fh:
        values = json.load(fh)
    unknown = set(values) - parser_dests
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, value in values.items():
        # config supplies defaults; explicit flags win
        if key in args._explicit:
            continue
        setattr(args, key, value)
    return args


class _TrackingParser(argparse.ArgumentParser):
    """Remembers which dests were set explicitly on the command line."""

    def parse_args(self, argv=None, namespace=None):
        args = super().parse_args(argv, namespace)
        argv = sys.argv[1:] if argv is None else argv
        explicit = set()
        for action in self._actions:
            for opt in action.option_strings:
                if any(a == opt or a.startswith(opt + "=") for a in argv):
                    explicit.add(action.dest)
        args._explicit = explicit
        return args


def _model_config_from_args(args):
    cfg = {"kind": args.kind}
    if args.kind == "transformer":
        cfg.update(
            d_model=args.d_model,
            heads=args.heads,
            layers=args.layers,
            scheme=args.scheme,
            residual=not args.no_residual,
            layer_norm=not args.no_layer_norm,
        )
    else:
        cfg.update(hidden=args.d_model, layers=args.layers)
    cfg["lr"] = args.lr
    return cfg


def cmd_generate(args):
    lang = get_language(args.language)
    spec = datagen.dataset_spec(args.language, args.profile)
    overrides = {}
    for key in ("train_size", "bin_size", "num_bins"):
        val = getattr(args, key)
        if val is not None:
            overrides[key] = val
    if overrides:
        spec = datagen.DatasetSpec(
            spec.mode,
            overrides.get("train_size", spec.train_size),
            spec.train_range,
            overrides.get("bin_size", spec.bin_size),
            overrides.get("num_bins", spec.num_bins),
            spec.bin_width,
        )
    dataset = datagen.build_dataset(lang, spec, args.seed)
    outdir = Path(args.out or f"datasets/{args.language}")
    manifest = datagen.write_dataset(dataset, outdir)
    counts = ", ".join(f"{k}={v['count']}" for k, v in manifest["splits"].items())
    print(f"{args.language}: wrote {counts} to {outdir}")
    return 0


def _load_dataset(args):
    data_dir = args.data or f"datasets/{args.language}"
    if not (Path(data_dir) / "manifest.json").exists():
        raise UsageError(f"dataset not found at {data_dir}; run `fllab generate {args.language}` first")
    dataset = datagen.load_dataset(data_dir)
    if dataset.language != args.language:
        raise UsageError(f"dataset at {data_dir} is for {dataset.language}, not {args.language}")
    return dataset


def cmd_train(args):
    dataset = _load_dataset(args)
    config = _model_config_from_args(args)
    out = Path(args.out or f"results/{args.language}/single")
    out.mkdir(parents=True, exist_ok=True)
    run = train(
        config,
        dataset,
        lr=args.lr,
        seed=args.seed,
        epochs=args.epochs,
        checkpoint_path=out / "checkpoint.npz",
        log=print if args.verbose else None,
    )
    print(f"stop: {run.stop_reason} after {run.epochs_run} epochs")
    for b, acc in zip(dataset.bins, run.bin_accuracy):
        print(f"  bin [{b.lo}, {b.hi}]: {acc:.2f}")
    with open(out / "run.json", "w", encoding="utf-8") as fh:
        json.dump({"language": dataset.language, **run.to_json()}, fh, indent=2)
    return 0


def cmd_grid(args):
    dataset = _load_dataset(args)
    if args.full_grid:
        space = (
            profiles.full_lstm_space()
            if args.kind == "lstm"
            else profiles.full_transformer_space()
        )
    else:
        space = profiles.default_budget_space(args.kind)
    out = Path(args.out or f"results/{args.language}/grid")
    result = grid_search(
        dataset,
        space,
        seed=args.seed,
        budget=args.budget,
        epochs=args.epochs,
        out_dir=out,
        log=print if args.verbose else None,
    )
    print(f"{len(result.runs)} runs; per-bin top-5 mean: "
          + ", ".join(f"{x:.1f}" for x in result.top5_mean))
    best = result.best
    print(f"best: {best.config} -> " + ", ".join(f"{x:.1f}" for x in best.bin_accuracy))
    return 0


def _verify_shuffle(k, max_len, samples, seed, corrupt=False):
    ht = build_shuffle_dyck(k)
    if corrupt:
        sym = ht.symbols[0]
        ht.embed[sym] = tuple(-x for x in ht.embed[sym])
        ht._values = np.array(
            [ht.v_map @ np.array(ht.embed[s], dtype=np.int64) for s in ht.symbols]
        )
    machine = get_language("dyck1" if k == 1 else f"shuffle{k}").recognizer
    n_sym = 2 * k
    checked = mismatches = 0
    for length in range(0, max_len + 1):
        count = n_sym**length
        if count > 2_000_000:
            break
        if length == 0:
            tokens = np.zeros((1, 1), dtype=np.int64)
            lengths = np.zeros(1, dtype=np.int64)
        else:
            r = np.arange(count, dtype=np.int64)
            tokens = np.zeros((count, length), dtype=np.int64)
            for c in range(length):
                tokens[:, length - 1 - c] = (r // (n_sym**c)) % n_sym
            lengths = np.full(count, length, dtype=np.int64)
        a = kernels.shuffle_accept_batch(ht._values, k, tokens, lengths)
        b = kernels.cm_accept_batch(machine, tokens, lengths)
        mismatches += int((a != b).sum())
        checked += len(a)
    rng = np.random.default_rng(seed)
    alphabet = ht.symbols
    for _ in range(samples):
        word = "".join(rng.choice(alphabet, size=rng.integers(0, 151)))
        if ht.accepts(word) != machine.accepts(word):
            mismatches += 1
        checked += 1
    return checked, mismatches


def cmd_verify(args):
    failures = 0
    checked, bad = _verify_shuffle(1, args.max_len, args.samples, args.seed,
                                   corrupt=args.corrupt_embed_sign)
    print(f"shuffle-1 construction vs machine: {checked} words, {bad} mismatches")
    failures += bad
    checked, bad = _verify_shuffle(2, args.max_len, args.samples, args.seed + 1)
    print(f"shuffle-2 construction vs machine: {checked} words, {bad} mismatches")
    failures += bad

    lang = get_language("boolexp3")
    ht = build_boolexp(lang)
    machine = lang.recognizer
    rng = np.random.default_rng(args.seed + 2)
    checked = bad = 0
    for length in range(0, min(args.max_len, 8) + 1):
        for word in itertools.product(lang.alphabet, repeat=length):
            word = "".join(word)
            if ht.accepts(word) != machine.accepts(word):
                bad += 1
            checked += 1
    for _ in range(args.samples):
        word = "".join(rng.choice(lang.alphabet, size=rng.integers(0, 151)))
        if ht.accepts(word) != machine.accepts(word):
            bad += 1
        checked += 1
    print(f"boolexp-3 construction vs machine: {checked} words, {bad} mismatches")
    failures += bad

    sm = shuffle_stateless_machine(get_language("shuffle2").extra["pairs"])
    hr = build_rcl(sm)
    rng = np.random.default_rng(args.seed + 3)
    checked = bad = 0
    for length in range(0, min(args.max_len, 8) + 1):
        for word in itertools.product(sm.alphabet, repeat=length):
            word = "".join(word)
            if hr.accepts(word) != sm.accepts(word):
                bad += 1
            checked += 1
    for _ in range(args.samples):
        word = "".join(rng.choice(sm.alphabet, size=rng.integers(0, 151)))
        if hr.accepts(word) != sm.accepts(word):
            bad += 1
        checked += 1
    print(f"rcl(shuffle-2 stateless) vs machine: {checked} words, {bad} mismatches")
    failures += bad

    rng = np.random.default_rng(args.seed + 4)
    worst = 0.0
    for i in range(args.models):
        cfg = TransformerConfig(
            vocab=("a", "b"),
            d_model=int(rng.choice([4, 8, 16])),
            heads=int(rng.choice([1, 2])),
            layers=int(rng.integers(1, 5)),
            scheme="masking",
        )
        model = make_model(cfg, seed=int(rng.integers(2**31)))
        worst = max(worst, check_masking_constancy(model, 24))
    ok = worst < 1e-6
    print(f"masking-only constancy ({args.models} models): max deviation {worst:.2e} "
          f"{'ok' if ok else 'FAIL'}")
    failures += 0 if ok else 1

    rng = np.random.default_rng(args.seed + 5)
    worst = 0.0
    for i in range(args.models):
        cfg = TransformerConfig(
            vocab=("[", "]", "#"),
            d_model=int(rng.choice([4, 8, 16])),
            heads=int(rng.choice([1, 2])),
            layers=1,
            scheme="masking",
        )
        model = make_model(cfg, seed=int(rng.integers(2**31)))
        deltas = check_reset_invariance(model, "[[", "]]", "[]")
        worst = max(worst, *deltas)
    ok = worst == 0.0
    print(f"single-layer reset invariance ({args.models} models): max delta {worst:.2e} "
          f"{'ok' if ok else 'FAIL'}")
    failures += 0 if ok else 1

    print("verification " + ("PASSED" if failures == 0 else f"FAILED ({failures})"))
    return 0 if failures == 0 else 1


def cmd_viz(args):
    ckpt = Path(args.checkpoint)
    if not ckpt.exists():
        raise UsageError(f"checkpoint {ckpt} not found")
    model = _ModelBase.load(ckpt)
    lang = get_language(args.language)
    if tuple(model.config.vocab) != lang.alphabet:
        raise UsageError(
            f"checkpoint vocab {model.config.vocab} does not match {args.language} "
            f"alphabet {lang.alphabet}"
        )
    rng = np.random.default_rng(args.seed)
    words = [datagen.sample_language(lang, rng, tuple(args.window)) for _ in range(args.words)]
    manifest = export_visualization(model, lang, words, args.out or f"viz/{args.language}")
    for j, r in enumerate(manifest["best_pearson_abs"]):
        print(f"counter {j}: best |pearson r| = {r:.4f}")
    if not manifest["best_pearson_abs"]:
        print("language has no counter ratios; exported attention/value data only")
    print(f"attention entropy ratio: {manifest['attention_entropy_ratio']:.4f}")
    return 0


def cmd_report(args):
    counts, missing = make_report(args.results, args.out or "tables")
    for name, n in counts.items():
        print(f"{name}: {n} rows")
    for path in missing:
        print(f"missing run file: {path}")
    return 0


def build_parser():
    parser = _TrackingParser(
        prog="fllab",
        description="formal-language laboratory: datasets, constructions, training",
        epilog=_catalog_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--config", default=None, help="JSON config file; flags override")

    p = sub.add_parser("generate", help="sample a dataset and write JSONL splits")
    p.add_argument("language")
    p.add_argument("--profile", choices=("full", "desk"), default="full")
    p.add_argument("--train-size", type=int, default=None, dest="train_size")
    p.add_argument("--bin-size", type=int, default=None, dest="bin_size")
    p.add_argument("--num-bins", type=int, default=None, dest="num_bins")
    common(p)
    p.set_defaults(func=cmd_generate)

    def model_flags(p):
        p.add_argument("--kind", choices=("transformer", "lstm"), default="transformer")
        p.add_argument("--d-model", type=int, default=16, dest="d_model",
                       help="hidden size (transformer d_model / lstm hidden)")
        p.add_argument("--heads", type=int, default=1)
        p.add_argument("--layers", type=int, default=1)
        p.add_argument("--scheme", default="masking",
                       choices=("masking", "absolute", "relative", "cos", "trainable"))
        p.add_argument("--no-residual", action="store_true", dest="no_residual")
        p.add_argument("--no-layer-norm", action="store_true", dest="no_layer_norm")
        p.add_argument("--lr", type=float, default=1e-2)
        p.add_argument("--epochs", type=int, default=100)
        p.add_argument("--data", default=None, help="dataset directory")
        p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("train", help="train one model on a generated dataset")
    p.add_argument("language")
    model_flags(p)
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("grid", help="grid search over a hyperparameter space")
    p.add_argument("language")
    model_flags(p)
    p.add_argument("--budget", type=int, default=None, help="max configurations")
    p.add_argument("--full-grid", action="store_true", dest="full_grid")
    common(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("verify", help="run the construction equivalence suites")
    p.add_argument("--max-len", type=int, default=10, dest="max_len")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--models", type=int, default=100)
    p.add_argument("--corrupt-embed-sign", action="store_true",
                   dest="corrupt_embed_sign", help=argparse.SUPPRESS)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("viz", help="export visualization bundle for a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("language")
    p.add_argument("--words", type=int, default=50)
    p.add_argument("--window", type=int, nargs=2, default=(2, 50))
    common(p)
    p.set_defaults(func=cmd_viz)

    p = sub.add_parser("report", help="regenerate result tables from stored runs")
    p.add_argument("--results", default="results")
    common(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    dests = {a.dest for a in parser._actions} | {
        a.dest for sp in parser._subparsers._group_actions for c in sp.choices.values()
        for a in c._actions
    }
    try:
        args = _apply_config_file(args, dests)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    except (datagen.GenerationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Training loop, stringent bin-wise evaluation, and grid search.

A prediction for a string counts as correct only if the thresholded output
row matches the target row at every single step.  Training minimizes MSE
between sigmoid outputs and k-hot rows with RMSProp (batch 32), evaluates
every bin each epoch, and stops early only on 100% across all bins.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .catalog import get_language
from .neural import (
    LstmConfig,
    NonFiniteGradient,
    RmsProp,
    TransformerConfig,
    make_model,
    mse_masked,
)


@dataclass
class TrainRun:
    config: dict
    seed: int
    lr: float
    epochs_run: int
    stop_reason: str  # "early_stop" | "epochs" | "diverged"
    losses: list
    bin_accuracy: list
    bin_history: list = field(default_factory=list)
    wall_seconds: float = 0.0
    checkpoint: str = None

    def to_json(self):
        return asdict(self)


@dataclass
class GridResult:
    language: str
    runs: list  # of TrainRun
    top5_mean: list  # per bin
    best_index: int

    @property
    def best(self):
        return self.runs[self.best_index]


class OraclePredictor:
    """legal_next wrapped with the model prediction interface.

    Emits the exact target rows as probabilities, so it must score 100.0 on
    every bin of every language under the strict metric.
    """

    def __init__(self, lang):
        self.lang = lang
        self.config = type("Cfg", (), {"vocab": lang.alphabet, "scheme": "oracle"})()
        self._index = {s: i for i, s in enumerate(lang.alphabet)}
        self._col = {s: i for i, s in enumerate(lang.symbols)}

    def tokenize(self, word):
        return np.array([self._index[s] for s in word], dtype=np.int64)

    def predict_probs_batch(self, tokens, lengths):
        n, t_len = tokens.shape
        out = np.zeros((n, t_len, len(self.lang.symbols)))
        for r in range(n):
            st = self.lang.stepper()
            for t in range(int(lengths[r])):
                st.advance(self.lang.alphabet[tokens[r, t]])
                for s in st.legal():
                    out[r, t, self._col[s]] = 1.0
        return out


def encode_items(model, items):
    """Tokenized (tokens, lengths, targets, mask) arrays for (word, target) pairs."""
    lengths = np.array([len(w) for w, _ in items], dtype=np.int64)
    t_len = max(int(lengths.max()), 1)
    width = items[0][1].shape[1]
    tokens = np.zeros((len(items), t_len), dtype=np.int64)
    targets = np.zeros((len(items), t_len, width))
    for r, (word, tgt) in enumerate(items):
        tokens[r, : len(word)] = model.tokenize(word)
        targets[r, : len(word)] = tgt
    mask = np.arange(t_len)[None, :] < lengths[:, None]
    return tokens, lengths, targets, mask


def evaluate(model, items, batch_size=256):
    """Whole-string accuracy (percent) on (word, target) pairs.

    Strings the model cannot process (e.g. longer than a trainable
    positional table) count as incorrect.
    """
    if not items:
        raise ValueError("empty bin")
    limit = getattr(getattr(model, "config", None), "max_len", None)
    if getattr(getattr(model, "config", None), "scheme", None) != "trainable":
        limit = None
    order = np.argsort([len(w) for w, _ in items], kind="stable")
    correct = 0
    for start in range(0, len(order), batch_size):
        chunk = [items[i] for i in order[start : start + batch_size]]
        if limit is not None:
            runnable = [it for it in chunk if len(it[0]) <= limit]
        else:
            runnable = chunk
        if not runnable:
            continue
        tokens, lengths, targets, mask = encode_items(model, runnable)
        probs = model.predict_probs_batch(tokens, lengths)
        bits = probs > 0.5
        eq = (bits == (targets > 0.5)) | ~mask[:, :, None]
        correct += int(eq.all(axis=(1, 2)).sum())
    return 100.0 * correct / len(items)


def evaluate_bins(model, dataset, batch_size=256):
    return [evaluate(model, b.items, batch_size=batch_size) for b in dataset.bins]


def _config_obj(config, vocab):
    """Build the dataclass config from a flat dict (kind, sizes, lr, ...)."""
    c = dict(config)
    kind = c.pop("kind", "transformer")
    c.pop("lr", None)
    if kind == "transformer":
        return TransformerConfig(vocab=vocab, **c)
    if kind == "lstm":
        return LstmConfig(vocab=vocab, **c)
    raise ValueError(f"unknown model kind {kind!r}")


def train(config, dataset, lr, seed, epochs=100, batch_size=32, early_stop=True,
          checkpoint_path=None, log=None):
    """One training run; returns a TrainRun (diverged runs score 0.0)."""
    if epochs > 100:
        raise ValueError("the protocol caps training at 100 epochs")
    lang = get_language(dataset.language)
    cfg = _config_obj(config, lang.alphabet)
    model = make_model(cfg, seed=seed)
    opt = RmsProp(model.parameters(), lr=lr)
    rng = np.random.default_rng(seed)
    tokens, lengths, targets, mask = encode_items(model, dataset.train)

    losses = []
    history = []
    stop_reason = "epochs"
    start_time = time.time()
    epochs_run = 0
    for epoch in range(epochs):
        order = rng.permutation(len(dataset.train))
        total, steps = 0.0, 0
        try:
            for lo in range(0, len(order), batch_size):
                sel = order[lo : lo + batch_size]
                t_max = max(int(lengths[sel].max()), 1)
                opt.zero_grad()
                loss = mse_masked(
                    model.forward_tokens(tokens[sel, :t_max], lengths[sel]),
                    targets[sel, :t_max],
                    mask[sel, :t_max],
                )
                if not np.isfinite(loss.data):
                    raise NonFiniteGradient("non-finite loss")
                loss.backward()
                opt.step()
                total += float(loss.data)
                steps += 1
        except NonFiniteGradient:
            stop_reason = "diverged"
            epochs_run = epoch + 1
            losses.append(float("nan"))
            history.append([0.0] * len(dataset.bins))
            break
        losses.append(total / max(steps, 1))
        bins = evaluate_bins(model, dataset)
        history.append(bins)
        epochs_run = epoch + 1
        if log:
            log(f"epoch {epochs_run}: loss {losses[-1]:.5f} bins {['%.1f' % b for b in bins]}")
        if early_stop and all(b == 100.0 for b in bins):
            stop_reason = "early_stop"
            break

    final_bins = history[-1] if history else [0.0] * len(dataset.bins)
    run = TrainRun(
        config=dict(config),
        seed=int(seed),
        lr=float(lr),
        epochs_run=epochs_run,
        stop_reason=stop_reason,
        losses=losses,
        bin_accuracy=list(final_bins),
        bin_history=history,
        wall_seconds=time.time() - start_time,
    )
    if checkpoint_path is not None and stop_reason != "diverged":
        model.save(checkpoint_path)
        run.checkpoint = str(checkpoint_path)
    run._model = model  # transient, for in-process callers
    return run


def derive_seeds(master_seed, n):
    """Independent per-run seeds from one master seed (splittable scheme)."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(master_seed).spawn(n)]


def grid_search(dataset, space, seed, budget=None, epochs=100, out_dir=None,
                early_stop=True, log=None, keep_models=False):
    """Run (budget-capped) configurations and summarize per-bin statistics.

    `space` is a list of flat config dicts carrying "kind", sizes, and "lr".
    Results are ranked by mean bin accuracy; top5_mean is the per-bin mean of
    the five best runs in that bin, diverged runs included at 0.0.
    """
    if not space:
        raise ValueError("empty search space")
    configs = space[:budget] if budget else list(space)
    seeds = derive_seeds(seed, len(configs))
    runs = []
    for i, (config, run_seed) in enumerate(zip(configs, seeds)):
        lr = config["lr"]
        if log:
            log(f"[{i + 1}/{len(configs)}] {config}")
        run = train(config, dataset, lr=lr, seed=run_seed, epochs=epochs,
                    early_stop=early_stop)
        if log:
            log(f"    -> {run.stop_reason} after {run.epochs_run} epochs, "
                f"bins {['%.1f' % b for b in run.bin_accuracy]}")
        if not keep_models:
            run._model = None
        runs.append(run)
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            with open(out / f"run_{i:03d}.json", "w", encoding="utf-8") as fh:
                json.dump({"language": dataset.language, **run.to_json()}, fh, indent=2)

    n_bins = len(dataset.bins)
    per_bin = np.array([r.bin_accuracy for r in runs])
    top5 = [
        float(np.mean(sorted(per_bin[:, b], reverse=True)[:5])) for b in range(n_bins)
    ]
    best_index = int(np.argmax(per_bin.mean(axis=1)))
    result = GridResult(dataset.language, runs, top5, best_index)
    if out_dir is not None:
        index = {
            "language": dataset.language,
            "seed": int(seed),
            "runs": [f"run_{i:03d}.json" for i in range(len(runs))],
            "top5_mean": top5,
            "best_index": best_index,
            "bins": [{"lo": b.lo, "hi": b.hi} for b in dataset.bins],
        }
        with open(Path(out_dir) / "index.json", "w", encoding="utf-8") as fh:
            json.dump(index, fh, indent=2)
    return result

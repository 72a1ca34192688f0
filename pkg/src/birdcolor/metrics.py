"""Recording-level multi-label metrics: macro-F1, macro ROC-AUC, CMAP.

Class exclusion rules, since real folds often miss classes entirely:
F1 and CMAP average over classes with at least one positive label;
ROC-AUC additionally requires at least one negative. A batch where no
class qualifies raises MetricsError.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import rankdata


class MetricsError(Exception):
    pass


@dataclass(frozen=True)
class EvalBatch:
    scores: np.ndarray  # [n, n_classes] in [0, 1]
    truth: np.ndarray  # [n, n_classes] in {0, 1}
    threshold: float = 0.5

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        truth = np.asarray(self.truth, dtype=np.float64)
        if scores.ndim != 2 or scores.shape != truth.shape:
            raise ValueError("scores and truth must both be [n, n_classes]")
        if not np.all(np.isfinite(scores)) or scores.min() < 0 or scores.max() > 1:
            raise ValueError("scores must lie in [0, 1]")
        if not np.isin(truth, (0.0, 1.0)).all():
            raise ValueError("truth must be binary")
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must lie in (0, 1)")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "truth", truth)


def macro_f1(batch: EvalBatch) -> float:
    """Unweighted mean over classes with >= 1 positive of F1 at the batch
    threshold (score >= threshold counts as a positive prediction; 0/0
    ratios are taken as 0)."""
    included = batch.truth.sum(axis=0) > 0
    if not included.any():
        raise MetricsError("no class has a positive label")
    scores = batch.scores[:, included]
    truth = batch.truth[:, included]
    pred = scores >= batch.threshold
    tp = np.sum(pred & (truth == 1), axis=0)
    fp = np.sum(pred & (truth == 0), axis=0)
    fn = np.sum(~pred & (truth == 1), axis=0)
    with np.errstate(invalid="ignore"):
        precision = np.where(tp + fp > 0, tp / np.maximum(tp + fp, 1), 0.0)
        recall = np.where(tp + fn > 0, tp / np.maximum(tp + fn, 1), 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / np.maximum(denom, 1e-300), 0.0)
    return float(np.mean(f1))


def macro_roc_auc(batch: EvalBatch) -> float:
    """Unweighted mean over classes with both labels present of the
    Mann-Whitney AUC, ties counted as half a concordant pair."""
    n_pos = batch.truth.sum(axis=0)
    included = (n_pos > 0) & (n_pos < batch.truth.shape[0])
    if not included.any():
        raise MetricsError("no class has both a positive and a negative label")
    aucs = []
    for c in np.flatnonzero(included):
        pos = batch.truth[:, c] == 1
        ranks = rankdata(batch.scores[:, c])  # average rank handles ties as 0.5
        p = pos.sum()
        n = ranks.size - p
        aucs.append((ranks[pos].sum() - p * (p + 1) / 2) / (p * n))
    return float(np.mean(aucs))


def cmap(batch: EvalBatch) -> float:
    """Unweighted mean over classes with >= 1 positive of average precision
    on the score-descending ranking. Tied scores keep their original
    sample order (stable sort)."""
    included = batch.truth.sum(axis=0) > 0
    if not included.any():
        raise MetricsError("no class has a positive label")
    aps = []
    for c in np.flatnonzero(included):
        order = np.argsort(-batch.scores[:, c], kind="stable")
        rel = batch.truth[order, c]
        hits = np.cumsum(rel)
        precision_at_k = hits / np.arange(1, rel.size + 1)
        aps.append(np.sum(precision_at_k * rel) / rel.sum())
    return float(np.mean(aps))


def evaluate(scores: np.ndarray, truth: np.ndarray, threshold: float = 0.5) -> dict:
    batch = EvalBatch(scores=scores, truth=truth, threshold=threshold)
    return {
        "macro_f1": macro_f1(batch),
        "macro_roc_auc": macro_roc_auc(batch),
        "cmap": cmap(batch),
    }


def write_metrics_csv(path: str | Path, rows: list[tuple[str, int, float]]) -> None:
    """Rows are (metric, fold, value); fold -1 means the cross-fold mean."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "fold", "value"])
        for metric, fold, value in rows:
            writer.writerow([metric, fold, f"{value:.12g}"])


def write_metrics_json(path: str | Path, summary: dict) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")

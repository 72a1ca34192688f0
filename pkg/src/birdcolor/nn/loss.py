"""Binary cross-entropy over multi-hot recording labels."""

from __future__ import annotations

import numpy as np

CLAMP_EPS = 1e-7


def bce_loss(pred: np.ndarray, target: np.ndarray, eps: float = CLAMP_EPS) -> float:
    """Mean BCE over recordings and classes.

    pred is clamped into [eps, 1-eps] before the logs so the loss stays
    finite at saturated predictions.
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs target {target.shape}")
    p = np.clip(pred, eps, 1.0 - eps)
    return float(-np.mean(target * np.log(p) + (1.0 - target) * np.log1p(-p)))


def bce_loss_backward(pred: np.ndarray, target: np.ndarray, eps: float = CLAMP_EPS) -> np.ndarray:
    """d loss / d pred; zero where the clamp is active (the loss is flat there)."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    p = np.clip(pred, eps, 1.0 - eps)
    g = -(target / p - (1.0 - target) / (1.0 - p)) / pred.size
    g[(pred < eps) | (pred > 1.0 - eps)] = 0.0
    return g

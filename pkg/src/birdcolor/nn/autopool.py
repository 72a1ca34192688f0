"""Adaptive pooling over bag instances.

Per class, the pooled probability is a softmax-weighted average of the
instance probabilities, with the learned scalar alpha setting the weight
temperature:

    pooled = sum_i p_i * exp(alpha * p_i) / sum_j exp(alpha * p_j)

alpha = 0 is the unweighted mean, alpha = 1 soft-max pooling, and
alpha -> infinity the max. Masked-out (zero-padded) instances are excluded
from both the weights and the normalizer, so padding is exactly neutral.
"""

from __future__ import annotations

import numpy as np


class AutopoolError(Exception):
    pass


def _masked(probs: np.ndarray, mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    probs = np.asarray(probs, dtype=np.float64)
    mask = np.asarray(mask)
    if probs.ndim != 2:
        raise AutopoolError("probs must be [n_instances, n_classes]")
    if mask.shape != (probs.shape[0],):
        raise AutopoolError("mask length must match instance count")
    keep = mask.astype(bool)
    if not keep.any():
        raise AutopoolError("at least one instance must be masked in")
    return probs, keep


def _weights(p: np.ndarray, alpha: float) -> np.ndarray:
    z = alpha * p
    z = z - z.max(axis=0, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=0, keepdims=True)


def autopool(probs: np.ndarray, mask: np.ndarray, alpha: float) -> np.ndarray:
    """Pool [n_instances, n_classes] probabilities to one vector per class."""
    probs, keep = _masked(probs, mask)
    p = probs[keep]
    w = _weights(p, alpha)
    return (p * w).sum(axis=0)


def autopool_backward(
    probs: np.ndarray, mask: np.ndarray, alpha: float, gout: np.ndarray
) -> tuple[np.ndarray, float]:
    """Gradients of sum(gout * pooled) wrt probs and alpha.

    Masked-out rows get exactly zero gradient. d pooled / d alpha is the
    softmax-weighted variance of the instance probabilities, hence >= 0.
    """
    probs, keep = _masked(probs, mask)
    p = probs[keep]
    w = _weights(p, alpha)
    pooled = (p * w).sum(axis=0)
    gp = w * (1.0 + alpha * (p - pooled[None, :])) * gout[None, :]
    galpha = float((gout * (w * p * (p - pooled[None, :])).sum(axis=0)).sum())
    gprobs = np.zeros_like(probs)
    gprobs[keep] = gp
    return gprobs, galpha

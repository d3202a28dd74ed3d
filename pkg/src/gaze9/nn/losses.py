"""Softmax cross-entropy with the max-shift stability trick."""

from __future__ import annotations

import numpy as np


def softmax(logits: np.ndarray) -> np.ndarray:
    """Softmax along the last axis; the max is subtracted before exp."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, label: int):
    """Single-sample loss.

    Returns (loss, probs, grad_logits) with loss = -ln probs[label] and
    grad = probs - onehot(label).
    """
    if not np.all(np.isfinite(logits)):
        raise ValueError("logits must be finite")
    probs = softmax(np.asarray(logits))
    shifted = logits - logits.max()
    # -ln softmax[label] computed without re-exponentiating probs[label]
    loss = float(np.log(np.exp(shifted).sum()) - shifted[label])
    grad = probs.copy()
    grad[label] -= 1.0
    return loss, probs, grad


def softmax_cross_entropy_batch(logits: np.ndarray, labels: np.ndarray):
    """Mean loss over a batch; grad is already divided by the batch size."""
    n = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    loss = float((log_z - shifted[np.arange(n), labels]).mean())
    probs = np.exp(shifted) / np.exp(shifted).sum(axis=1, keepdims=True)
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1.0
    grad /= n
    return loss, probs, grad.astype(logits.dtype)

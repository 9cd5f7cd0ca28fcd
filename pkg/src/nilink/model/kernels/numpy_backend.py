"""Pure-numpy reference implementations of the training hot loops."""

from __future__ import annotations

import numpy as np

PROB_EPS = 1e-7


def mean_pool(table: np.ndarray, ids: np.ndarray) -> np.ndarray:
    if len(ids) == 0:
        return np.zeros(table.shape[1], dtype=table.dtype)
    return table[ids].mean(axis=0)


def scatter_add_rows(grad_table: np.ndarray, ids: np.ndarray, vec: np.ndarray) -> None:
    np.add.at(grad_table, ids, vec)


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def focal_loss_value(t: np.ndarray, y: np.ndarray, gamma: float) -> float:
    t = np.clip(t, PROB_EPS, 1.0 - PROB_EPS)
    pos = y * (1.0 - t) ** gamma * np.log(t)
    neg = (1.0 - y) * t ** gamma * np.log(1.0 - t)
    return float(-np.sum(pos + neg))


def focal_grad_logits(t: np.ndarray, y: np.ndarray, gamma: float) -> np.ndarray:
    """Gradient of the focal loss with respect to pre-sigmoid logits."""
    t = np.clip(t, PROB_EPS, 1.0 - PROB_EPS)
    grad_pos = gamma * t * (1.0 - t) ** gamma * np.log(t) - (1.0 - t) ** (gamma + 1.0)
    grad_neg = t ** (gamma + 1.0) - gamma * t ** gamma * (1.0 - t) * np.log(1.0 - t)
    return y * grad_pos + (1.0 - y) * grad_neg


def bce_value(p: float, label: float) -> float:
    p = min(max(p, PROB_EPS), 1.0 - PROB_EPS)
    return float(-(label * np.log(p) + (1.0 - label) * np.log(1.0 - p)))


def adam_step(
    param: np.ndarray,
    grad: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    step: int,
    lr: float,
    beta1: float,
    beta2: float,
    eps: float,
) -> None:
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1 ** step)
    v_hat = v / (1.0 - beta2 ** step)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)

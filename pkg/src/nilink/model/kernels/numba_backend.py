"""Numba-jitted versions of the training hot loops.

Signatures match numpy_backend exactly; loops are written element-wise so the
JIT can fuse them. First call per process pays the compile cost.
"""

from __future__ import annotations

import numpy as np
from numba import njit

PROB_EPS = 1e-7


@njit(cache=True)
def mean_pool(table, ids):
    d = table.shape[1]
    out = np.zeros(d, dtype=table.dtype)
    n = len(ids)
    if n == 0:
        return out
    for k in range(n):
        row = ids[k]
        for j in range(d):
            out[j] += table[row, j]
    for j in range(d):
        out[j] /= n
    return out


@njit(cache=True)
def scatter_add_rows(grad_table, ids, vec):
    d = grad_table.shape[1]
    for k in range(len(ids)):
        row = ids[k]
        for j in range(d):
            grad_table[row, j] += vec[j]


@njit(cache=True)
def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


@njit(cache=True)
def focal_loss_value(t, y, gamma):
    total = 0.0
    for i in range(len(t)):
        ti = min(max(t[i], PROB_EPS), 1.0 - PROB_EPS)
        if y[i] > 0.5:
            total -= (1.0 - ti) ** gamma * np.log(ti)
        else:
            total -= ti ** gamma * np.log(1.0 - ti)
    return total


@njit(cache=True)
def focal_grad_logits(t, y, gamma):
    out = np.empty(len(t), dtype=np.float64)
    for i in range(len(t)):
        ti = min(max(t[i], PROB_EPS), 1.0 - PROB_EPS)
        if y[i] > 0.5:
            out[i] = gamma * ti * (1.0 - ti) ** gamma * np.log(ti) - (1.0 - ti) ** (gamma + 1.0)
        else:
            out[i] = ti ** (gamma + 1.0) - gamma * ti ** gamma * (1.0 - ti) * np.log(1.0 - ti)
    return out


@njit(cache=True)
def bce_value(p, label):
    p = min(max(p, PROB_EPS), 1.0 - PROB_EPS)
    return -(label * np.log(p) + (1.0 - label) * np.log(1.0 - p))


@njit(cache=True)
def adam_step(param, grad, m, v, step, lr, beta1, beta2, eps):
    flat_p = param.ravel()
    flat_g = grad.ravel()
    flat_m = m.ravel()
    flat_v = v.ravel()
    c1 = 1.0 - beta1 ** step
    c2 = 1.0 - beta2 ** step
    for i in range(flat_p.size):
        flat_m[i] = beta1 * flat_m[i] + (1.0 - beta1) * flat_g[i]
        flat_v[i] = beta2 * flat_v[i] + (1.0 - beta2) * flat_g[i] * flat_g[i]
        m_hat = flat_m[i] / c1
        v_hat = flat_v[i] / c2
        flat_p[i] -= lr * m_hat / (np.sqrt(v_hat) + eps)

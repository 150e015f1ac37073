"""NumPy reference implementation of the evaluation kernels.

Used as the fallback backend when the compiled extension is unavailable,
and as the ground truth the compiled backend is tested against.
"""

from __future__ import annotations

import numpy as np


def poly_eval_batch(coef: np.ndarray, idx: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Evaluate sum_t coef[t] * prod_u z[idx[t, u]] at each row of points.

    coef: (m,) complex128, idx: (m, k) int64 zero-based, points: (B, n).
    Returns (B,) complex128.
    """
    points = np.ascontiguousarray(points, dtype=np.complex128)
    if coef.shape[0] == 0:
        return np.zeros(points.shape[0], dtype=np.complex128)
    prods = points[:, idx].prod(axis=2)
    return prods @ coef


def poly_eval_grad_batch(coef: np.ndarray, idx: np.ndarray, points: np.ndarray):
    """Values and holomorphic gradients of the polynomial at each point.

    Returns (values (B,), gradients (B, n)); gradient entries are the
    partial derivatives sum over monomial positions of the off-position
    products, assembled with exclusive prefix/suffix products.
    """
    points = np.ascontiguousarray(points, dtype=np.complex128)
    nb, n = points.shape
    m, k = idx.shape
    grads = np.zeros((nb, n), dtype=np.complex128)
    if m == 0:
        return np.zeros(nb, dtype=np.complex128), grads
    factors = points[:, idx]  # (B, m, k)
    prefix = np.ones_like(factors)
    suffix = np.ones_like(factors)
    np.cumprod(factors[:, :, :-1], axis=2, out=prefix[:, :, 1:])
    np.cumprod(factors[:, :, :0:-1], axis=2, out=suffix[:, :, -2::-1])
    values = (prefix[:, :, -1] * factors[:, :, -1]) @ coef
    contrib = coef[None, :, None] * prefix * suffix
    rows = np.broadcast_to(np.arange(nb)[:, None, None], contrib.shape)
    cols = np.broadcast_to(idx[None, :, :], contrib.shape)
    np.add.at(grads, (rows, cols), contrib)
    return values, grads

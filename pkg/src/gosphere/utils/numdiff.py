#!/usr/bin/env python3
"""
Finite Differences
Batched central-difference stencils with Richardson extrapolation.

Every routine takes a batch function fn(points) with points of shape (M, d) returning (M,) or
(M, k...) values, evaluates the whole stencil in one call, and combines levels h, h/2, h/4, ...
so that the leading even-order error terms cancel.
"""

from typing import Callable, List, Optional, Tuple

import numpy as np

BatchFn = Callable[[np.ndarray], np.ndarray]


def richardson(estimates: List[np.ndarray]) -> np.ndarray:
    """Extrapolate central-difference estimates taken at steps h, h/2, h/4, ... (error even in h)."""
    table = list(estimates)
    factor = 4.0
    while len(table) > 1:
        table = [(factor * fine - coarse) / (factor - 1.0) for coarse, fine in zip(table[:-1], table[1:])]
        factor *= 4.0
    return table[0]


def _expand_steps(steps: np.ndarray, m: int, d: int) -> np.ndarray:
    steps = np.asarray(steps, dtype=float)
    if steps.ndim == 0:
        return np.full((m, d), float(steps))
    if steps.ndim == 1:
        return np.repeat(steps[:, None], d, axis=1)
    return steps


def _evaluate(fn: BatchFn, points: np.ndarray) -> np.ndarray:
    m, k, d = points.shape
    values = np.asarray(fn(points.reshape(m * k, d)), dtype=float)
    return values.reshape((m, k) + values.shape[1:])


def _hessian_stencil(d: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    eye = np.eye(d)
    rows = [np.zeros(d)]
    rows.extend(eye)
    rows.extend(-eye)
    iu, ju = np.triu_indices(d, k=1)
    for i, j in zip(iu, ju):
        rows.extend([eye[i] + eye[j], eye[i] - eye[j], -eye[i] + eye[j], -eye[i] - eye[j]])
    return np.array(rows), iu, ju


def _central_hessian(fn: BatchFn, z: np.ndarray, h: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    m, d = z.shape
    stencil, iu, ju = _hessian_stencil(d)
    values = _evaluate(fn, z[:, None, :] + stencil[None, :, :] * h[:, None, :])
    tail = values.shape[2:]
    pad = (1,) * len(tail)

    f0 = values[:, 0]
    fp = values[:, 1:1 + d]
    fm = values[:, 1 + d:1 + 2 * d]
    hh = h.reshape((m, d) + pad)

    grad = (fp - fm) / (2.0 * hh)
    hess = np.empty((m, d, d) + tail)
    idx = np.arange(d)
    hess[:, idx, idx] = (fp - 2.0 * f0[:, None] + fm) / hh ** 2
    if len(iu):
        quad = values[:, 1 + 2 * d:].reshape((m, len(iu), 4) + tail)
        denom = (4.0 * h[:, iu] * h[:, ju]).reshape((m, len(iu)) + pad)
        mixed = (quad[:, :, 0] - quad[:, :, 1] - quad[:, :, 2] + quad[:, :, 3]) / denom
        hess[:, iu, ju] = mixed
        hess[:, ju, iu] = mixed
    return grad, hess


def hessian_batch(fn: BatchFn, z: np.ndarray, steps, levels: int = 3) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient (m, d, ...) and Hessian (m, d, d, ...) of fn at every row of z."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    h = _expand_steps(steps, *z.shape)
    grads, hessians = [], []
    for level in range(levels):
        grad, hess = _central_hessian(fn, z, h / 2.0 ** level)
        grads.append(grad)
        hessians.append(hess)
    return richardson(grads), richardson(hessians)


def gradient_batch(fn: BatchFn, z: np.ndarray, steps, levels: int = 3) -> np.ndarray:
    """Gradient (m, d, ...) of fn at every row of z by central differences."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    m, d = z.shape
    h = _expand_steps(steps, m, d)
    eye = np.eye(d)
    stencil = np.concatenate([eye, -eye])
    estimates = []
    for level in range(levels):
        hl = h / 2.0 ** level
        values = _evaluate(fn, z[:, None, :] + stencil[None, :, :] * hl[:, None, :])
        pad = (1,) * (values.ndim - 2)
        estimates.append((values[:, :d] - values[:, d:]) / (2.0 * hl.reshape((m, d) + pad)))
    return richardson(estimates)


_SIGNS = np.array([[a, b, c] for a in (1.0, -1.0) for b in (1.0, -1.0) for c in (1.0, -1.0)])


def third_directional(fn: BatchFn, y: np.ndarray, u: np.ndarray, v: np.ndarray, w: np.ndarray,
                      steps, levels: int = 3) -> np.ndarray:
    """Mixed third directional derivative D^3 fn[u, v, w] at every row of y (8-point stencil)."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    m, d = y.shape
    directions = np.stack([np.broadcast_to(u, (m, d)), np.broadcast_to(v, (m, d)), np.broadcast_to(w, (m, d))],
                          axis=1)
    h = np.broadcast_to(np.asarray(steps, dtype=float), (m,))
    weights = np.prod(_SIGNS, axis=1)
    estimates = []
    for level in range(levels):
        hl = h / 2.0 ** level
        offsets = np.einsum("ka,mad->mkd", _SIGNS, directions) * hl[:, None, None]
        values = _evaluate(fn, y[:, None, :] + offsets)
        estimates.append(np.einsum("k,mk->m", weights, values) / (8.0 * hl ** 3))
    return richardson(estimates)


def time_derivatives(fn: Callable[[np.ndarray], np.ndarray], t: np.ndarray, h: float = 1e-3,
                     levels: int = 3) -> Tuple[np.ndarray, np.ndarray]:
    """First and second derivatives of a curve fn(t) -> (k, dim) at the times t."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    center = np.asarray(fn(t))
    firsts, seconds = [], []
    for level in range(levels):
        hl = h / 2.0 ** level
        ahead = np.asarray(fn(t + hl))
        behind = np.asarray(fn(t - hl))
        firsts.append((ahead - behind) / (2.0 * hl))
        seconds.append((ahead - 2.0 * center + behind) / hl ** 2)
    return richardson(firsts), richardson(seconds)


def scaled_steps(z: np.ndarray, relative: float, floor: Optional[float] = None) -> np.ndarray:
    """Per-row step relative * |z| (optionally bounded below)."""
    norms = np.linalg.norm(np.atleast_2d(z), axis=1)
    steps = relative * norms
    if floor is not None:
        steps = np.maximum(steps, floor)
    return steps

#!/usr/bin/env python3
"""
Sample Nets
Seeded unit directions plus coordinate axes and axis pairs
"""

from typing import Optional

import numpy as np


def make_rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.default_rng(seed)


def unit_directions(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random unit vectors in R^n, shape (count, n)."""
    raw = rng.standard_normal((count, n))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    # zero draws
    norms[norms == 0.0] = 1.0
    return raw / norms


def structured_directions(n: int) -> np.ndarray:
    """Coordinate axes (both signs) and all normalized axis pairs e_i +- e_j."""
    eye = np.eye(n)
    rows = [eye, -eye]
    iu, ju = np.triu_indices(n, k=1)
    if len(iu):
        rows.append((eye[iu] + eye[ju]) / np.sqrt(2.0))
        rows.append((eye[iu] - eye[ju]) / np.sqrt(2.0))
    return np.concatenate(rows)


def sample_net(n: int, count: int, seed: Optional[int], structured: bool = True) -> np.ndarray:
    """Structured directions followed by `count` seeded random directions."""
    rng = make_rng(seed)
    random_part = unit_directions(n, count, rng)
    if not structured:
        return random_part
    return np.concatenate([structured_directions(n), random_part])


def orthonormal_complement(vector: np.ndarray) -> np.ndarray:
    """Orthonormal basis (rows) of the Euclidean complement of a nonzero vector."""
    vector = np.asarray(vector, dtype=float)
    _, _, vt = np.linalg.svd(vector[None, :])
    return vt[1:]

#!/usr/bin/env python3
"""
Quaternion Realizations
Quaternions as 4-tuples (a, b, c, d) = a + bi + cj + dk with ij = k, jk = i, ki = j.
Quaternionic matrices act on column vectors from the left; both realizations below are
algebra homomorphisms, so commutators can be taken on the realized matrices.
"""

from typing import Dict, Iterable, Tuple

import numpy as np

Quaternion = Tuple[float, float, float, float]

ONE: Quaternion = (1.0, 0.0, 0.0, 0.0)
I: Quaternion = (0.0, 1.0, 0.0, 0.0)
J: Quaternion = (0.0, 0.0, 1.0, 0.0)
K: Quaternion = (0.0, 0.0, 0.0, 1.0)
IMAGINARY_UNITS = {"i": I, "j": J, "k": K}

REALIZATIONS = ("real4", "complex2")

# negative trace form scale making E_1k - E_k1 a unit vector
TRACE_SCALE = {"real4": 8.0, "complex2": 4.0}


def qmul(p: Iterable[float], q: Iterable[float]) -> Quaternion:
    """Hamilton product p*q."""
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def qscale(q: Iterable[float], factor: float) -> Quaternion:
    return tuple(factor * x for x in q)


def left_real4(q: Iterable[float]) -> np.ndarray:
    """4x4 real matrix of p -> q*p in the basis 1, i, j, k."""
    a, b, c, d = q
    return np.array([[a, -b, -c, -d],
                     [b, a, -d, c],
                     [c, d, a, -b],
                     [d, -c, b, a]], dtype=float)


def complex2(q: Iterable[float]) -> np.ndarray:
    """2x2 complex matrix with i -> diag(i, -i), j -> [[0, 1], [-1, 0]]."""
    a, b, c, d = q
    return np.array([[a + 1j * b, c + 1j * d],
                     [-c + 1j * d, a - 1j * b]], dtype=complex)


def block_size(realization: str) -> int:
    return 4 if realization == "real4" else 2


def realize(q: Iterable[float], realization: str) -> np.ndarray:
    return left_real4(q) if realization == "real4" else complex2(q)


def quaternion_matrix(n: int, entries: Dict[Tuple[int, int], Iterable[float]], realization: str) -> np.ndarray:
    """Realize an n x n quaternionic matrix given by its nonzero entries (0-based indices)."""
    size = block_size(realization)
    dtype = float if realization == "real4" else complex
    matrix = np.zeros((n * size, n * size), dtype=dtype)
    for (row, col), q in entries.items():
        matrix[row * size:(row + 1) * size, col * size:(col + 1) * size] += realize(q, realization)
    return matrix


def sp_basis(indices: Iterable[int], n: int, realization: str, scale: float = 1.0):
    """Basis of sp(m) for the quaternionic coordinates `indices` inside M_n(H), with labels."""
    indices = list(indices)
    basis, labels = [], []
    for pos, a in enumerate(indices):
        for b in indices[pos + 1:]:
            basis.append(scale * quaternion_matrix(n, {(a, b): ONE, (b, a): qscale(ONE, -1.0)}, realization))
            labels.append(f"E{a + 1}{b + 1}-E{b + 1}{a + 1}")
            for name, unit in IMAGINARY_UNITS.items():
                basis.append(scale * quaternion_matrix(n, {(a, b): unit, (b, a): unit}, realization))
                labels.append(f"{name}(E{a + 1}{b + 1}+E{b + 1}{a + 1})")
        for name, unit in IMAGINARY_UNITS.items():
            basis.append(scale * quaternion_matrix(n, {(a, a): unit}, realization))
            labels.append(f"{name}E{a + 1}{a + 1}")
    return basis, labels

#!/usr/bin/env python3
"""
Lie Presentation Models
Lie algebras by structure constants, reductive splits g = h + m, homogeneous sphere presentations
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional

import numpy as np


class SpaceName:
    """Supported coset presentations of spheres"""

    SO = "so"
    SU = "su"
    U = "u"
    SP = "sp"
    SP_U1 = "sp_u1"
    SP_SP1 = "sp_sp1"

    ALL = [SO, SU, U, SP, SP_U1, SP_SP1]
    EXCEPTIONAL = ["g2", "spin7", "spin9"]

    DISPLAY = {
        SO: "SO({n})/SO({k})",
        SU: "SU({n})/SU({k})",
        U: "U({n})/U({k})",
        SP: "Sp({n})/Sp({k})",
        SP_U1: "Sp({n})U(1)/Sp({k})U(1)",
        SP_SP1: "Sp({n})Sp(1)/Sp({k})Sp(1)",
        "g2": "G2/SU(3)",
        "spin7": "Spin(7)/G2",
        "spin9": "Spin(9)/Spin(7)",
    }

    # smallest rank parameter for which the presentation is a sphere of the listed kind
    MIN_RANK = {SO: 3, SU: 3, U: 2, SP: 2, SP_U1: 2, SP_SP1: 2}

    @classmethod
    def display(cls, name: str, n: int) -> str:
        return cls.DISPLAY[name].format(n=n, k=n - 1)


@dataclass
class LieAlgebra:
    """Real Lie algebra with [e_i, e_j] = sum_k c[i, j, k] e_k"""

    dim: int
    basis_labels: List[str]
    structure_constants: np.ndarray
    bi_inner: np.ndarray
    realization: str = "real4"
    trace_scale: float = 1.0

    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.structure_constants)

    def ad(self, x: np.ndarray) -> np.ndarray:
        """Matrix of ad(x) acting on coordinate vectors."""
        return np.einsum("i,ijk->kj", x, self.structure_constants)

    def to_dict(self) -> Dict[str, Any]:
        nonzero = np.argwhere(self.structure_constants != 0.0)
        return {
            "dim": self.dim,
            "basis_labels": list(self.basis_labels),
            "realization": self.realization,
            "trace_scale": self.trace_scale,
            "structure_constants": [
                [int(i), int(j), int(k), float(self.structure_constants[i, j, k])] for i, j, k in nonzero
            ],
            "bi_inner": self.bi_inner.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LieAlgebra":
        dim = data["dim"]
        constants = np.zeros((dim, dim, dim))
        for i, j, k, value in data["structure_constants"]:
            constants[i, j, k] = value
        return cls(
            dim=dim,
            basis_labels=list(data["basis_labels"]),
            structure_constants=constants,
            bi_inner=np.asarray(data["bi_inner"], dtype=float),
            realization=data.get("realization", "real4"),
            trace_scale=data.get("trace_scale", 1.0),
        )


@dataclass
class ReductiveDecomposition:
    """Split g = h + m with [h, m] in m; m-coordinates are the m_indices coordinates"""

    algebra: LieAlgebra
    h_indices: List[int]
    m_indices: List[int]

    @property
    def m_dim(self) -> int:
        return len(self.m_indices)

    @property
    def h_dim(self) -> int:
        return len(self.h_indices)

    @cached_property
    def m_bracket_tensor(self) -> np.ndarray:
        """T[a, b, k]: m-coordinate k of [e_a, e_b] for a, b in m."""
        c = self.algebra.structure_constants
        return c[np.ix_(self.m_indices, self.m_indices, self.m_indices)]

    @cached_property
    def isotropy_action(self) -> np.ndarray:
        """A[j]: matrix of ad(h_j) restricted to m, so ad(h_j) u = A[j] @ u."""
        c = self.algebra.structure_constants
        return np.swapaxes(c[np.ix_(self.h_indices, self.m_indices, self.m_indices)], 1, 2)

    def embed_m(self, u: np.ndarray) -> np.ndarray:
        full = np.zeros(self.algebra.dim)
        full[self.m_indices] = u
        return full

    def embed_h(self, x: np.ndarray) -> np.ndarray:
        full = np.zeros(self.algebra.dim)
        full[self.h_indices] = x
        return full

    def to_dict(self) -> Dict[str, Any]:
        return {"algebra": self.algebra.to_dict(), "h_indices": list(self.h_indices),
                "m_indices": list(self.m_indices)}


@dataclass
class SpherePresentation:
    """A homogeneous sphere G/H with its Ad(H)-invariant splitting of m"""

    name: str
    n: int
    decomposition: ReductiveDecomposition
    m_blocks: List[List[int]]
    expected_go_verdict: bool
    sphere_dim: int
    slice_indices: Optional[List[int]] = None
    # ad(Z) restricted to m for generators Z of an enlarged symmetry group, when one is known
    extra_symmetry: List[np.ndarray] = field(default_factory=list)
    notes: str = ""

    @property
    def display_name(self) -> str:
        return SpaceName.display(self.name, self.n)

    @property
    def m_dim(self) -> int:
        return self.decomposition.m_dim

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "display_name": self.display_name,
            "n": self.n,
            "sphere_dim": self.sphere_dim,
            "m_blocks": [list(block) for block in self.m_blocks],
            "slice_indices": self.slice_indices,
            "expected_go_verdict": self.expected_go_verdict,
            "decomposition": self.decomposition.to_dict(),
            "notes": self.notes,
        }

#!/usr/bin/env python3
"""
Lie Algebra Service
Builds the homogeneous-sphere presentations from matrix realizations and answers bracket,
orbit and symmetry questions about them
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.optimize import least_squares

from gosphere.config.settings import CONFIG
from gosphere.models.norm.model import MinkowskiNorm
from gosphere.models.presentation.model import (
    LieAlgebra,
    ReductiveDecomposition,
    SpaceName,
    SpherePresentation,
)
from gosphere.services.liealg.quaternion import (
    IMAGINARY_UNITS,
    ONE,
    REALIZATIONS,
    TRACE_SCALE,
    qscale,
    quaternion_matrix,
    realize,
    sp_basis,
)
from gosphere.services.norms.service import NormService
from gosphere.utils.errors import (
    DimensionMismatchError,
    InvalidInputError,
    NumericalError,
    OutOfScopeError,
    ValidationError,
)
from gosphere.utils.logger import get_logger
from gosphere.utils.sampling import make_rng, sample_net
from gosphere.utils.validation import as_vector

logger = get_logger(__name__)

SQRT2 = np.sqrt(2.0)

# complex n x n realizations use -Re tr(XY) / 2
COMPLEX_TRACE_SCALE = 2.0


@dataclass
class WeakSymmetryResult:
    """Outcome of the search for g in H with Ad(g)u = -u"""

    found: bool
    residual: float
    depth: int
    attempts: int
    witness: Optional[List[List[float]]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "found": self.found,
            "residual": self.residual,
            "depth": self.depth,
            "attempts": self.attempts,
            "witness": self.witness,
        }


@dataclass
class NullityResult:
    """Dimension of the sp(1) directions that leave a norm invariant"""

    nullity: int
    singular_values: List[float] = field(default_factory=list)

    @property
    def symmetry(self) -> str:
        return {0: "Sp(n)", 1: "Sp(n)U(1)", 3: "Sp(n)Sp(1)"}.get(self.nullity, "inconsistent")

    def to_dict(self) -> Dict[str, Any]:
        return {"nullity": self.nullity, "symmetry": self.symmetry, "singular_values": self.singular_values}


def _unit(n: int, a: int, b: int, dtype=float) -> np.ndarray:
    matrix = np.zeros((n, n), dtype=dtype)
    matrix[a, b] = 1.0
    return matrix


def _direct_sum(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    dtype = np.result_type(first, second)
    size = first.shape[0] + second.shape[0]
    total = np.zeros((size, size), dtype=dtype)
    total[:first.shape[0], :first.shape[0]] = first
    total[first.shape[0]:, first.shape[0]:] = second
    return total


def _real_view(matrices: np.ndarray) -> np.ndarray:
    """Flatten a stack of (possibly complex) matrices to real coordinate rows."""
    flat = matrices.reshape(matrices.shape[0], -1)
    if np.iscomplexobj(flat):
        return np.concatenate([flat.real, flat.imag], axis=1)
    return flat


class LieAlgService:
    """Presentations of homogeneous spheres and operations on them"""

    def __init__(self, norm_service: Optional[NormService] = None):
        self.norm_service = norm_service or NormService()
        self.zero_tol = CONFIG["STRUCTURE_ZERO_TOL"]
        self.algebra_tol = CONFIG["ALGEBRA_TOL"]
        self._builders: Dict[str, Callable[[int, str], SpherePresentation]] = {
            SpaceName.SO: self._build_so,
            SpaceName.SU: self._build_su,
            SpaceName.U: self._build_u,
            SpaceName.SP: self._build_sp,
            SpaceName.SP_U1: self._build_sp_u1,
            SpaceName.SP_SP1: self._build_sp_sp1,
        }

    # ------------------------------------------------------------------ construction

    def algebra_from_matrices(self, basis: Sequence[np.ndarray], labels: Sequence[str], trace_scale: float,
                              realization: str = "real4") -> LieAlgebra:
        """Structure constants and -Re tr(XY)/trace_scale for a basis of matrices closed under commutators."""
        stack = np.array(basis)
        dim = stack.shape[0]
        coordinates = _real_view(stack).T
        commutators = np.einsum("iab,jbc->ijac", stack, stack)
        commutators = commutators - np.swapaxes(commutators, 0, 1)
        targets = _real_view(commutators.reshape((dim * dim,) + stack.shape[1:])).T

        solution, _, rank, _ = np.linalg.lstsq(coordinates, targets, rcond=None)
        if rank < dim:
            raise NumericalError("Basis matrices are linearly dependent", {"rank": int(rank), "dim": dim})
        closure = float(np.max(np.abs(coordinates @ solution - targets)))
        if closure > 1e-10:
            raise NumericalError("Basis is not closed under commutators", {"closure_defect": closure})

        constants = solution.T.reshape(dim, dim, dim)
        constants[np.abs(constants) < self.zero_tol] = 0.0
        bi_inner = -np.einsum("iab,jba->ij", stack, stack).real / trace_scale
        bi_inner = 0.5 * (bi_inner + bi_inner.T)
        return LieAlgebra(dim=dim, basis_labels=list(labels), structure_constants=constants, bi_inner=bi_inner,
                          realization=realization, trace_scale=trace_scale)

    def _presentation(self, name: str, n: int, m_basis, m_labels, h_basis, h_labels, trace_scale: float,
                      realization: str, m_blocks: List[List[int]], sphere_dim: int, slice_indices: List[int],
                      expected: bool, notes: str = "") -> SpherePresentation:
        algebra = self.algebra_from_matrices(list(m_basis) + list(h_basis), list(m_labels) + list(h_labels),
                                             trace_scale, realization)
        m_dim = len(m_basis)
        decomposition = ReductiveDecomposition(algebra=algebra, h_indices=list(range(m_dim, algebra.dim)),
                                               m_indices=list(range(m_dim)))
        presentation = SpherePresentation(name=name, n=n, decomposition=decomposition, m_blocks=m_blocks,
                                          expected_go_verdict=expected, sphere_dim=sphere_dim,
                                          slice_indices=slice_indices, notes=notes)
        if m_dim != sphere_dim:
            raise NumericalError(f"{presentation.display_name}: dim m = {m_dim}, sphere dimension {sphere_dim}")
        logger.info("Built presentation %s (dim g=%d, dim m=%d)", presentation.display_name, algebra.dim, m_dim)
        return presentation

    def build_presentation(self, name: str, n: int, realization: str = "real4") -> SpherePresentation:
        """Build one of the supported presentations G/H of a sphere."""
        if name in SpaceName.EXCEPTIONAL:
            raise OutOfScopeError(f"{SpaceName.DISPLAY[name]} is outside the supported presentations",
                                  {"name": name, "supported": SpaceName.ALL})
        if name not in self._builders:
            raise ValidationError(f"space must be one of: {', '.join(SpaceName.ALL)}", {"name": name})
        if realization not in REALIZATIONS:
            raise ValidationError(f"realization must be one of: {', '.join(REALIZATIONS)}")
        if not isinstance(n, (int, np.integer)) or n < SpaceName.MIN_RANK[name]:
            raise ValidationError(f"{name} needs n >= {SpaceName.MIN_RANK[name]}", {"n": n})
        return self._builders[name](int(n), realization)

    def build_sp_u1(self, n: int, realization: str = "real4") -> SpherePresentation:
        return self.build_presentation(SpaceName.SP_U1, n, realization)

    def _build_so(self, n: int, realization: str) -> SpherePresentation:
        m_basis = [_unit(n, 0, k) - _unit(n, k, 0) for k in range(1, n)]
        m_labels = [f"E1{k + 1}-E{k + 1}1" for k in range(1, n)]
        h_basis, h_labels = [], []
        for a in range(1, n):
            for b in range(a + 1, n):
                h_basis.append(_unit(n, a, b) - _unit(n, b, a))
                h_labels.append(f"E{a + 1}{b + 1}-E{b + 1}{a + 1}")
        return self._presentation(SpaceName.SO, n, m_basis, m_labels, h_basis, h_labels, COMPLEX_TRACE_SCALE,
                                  "real", [list(range(n - 1))], n - 1, [0], True, "symmetric pair")

    def _unitary_m1(self, n: int) -> Tuple[List[np.ndarray], List[str]]:
        basis, labels = [], []
        for k in range(1, n):
            basis.append((_unit(n, 0, k) - _unit(n, k, 0)).astype(complex))
            labels.append(f"E1{k + 1}-E{k + 1}1")
            basis.append(1j * (_unit(n, 0, k) + _unit(n, k, 0)))
            labels.append(f"i(E1{k + 1}+E{k + 1}1)")
        return basis, labels

    def _unitary_offdiagonal(self, n: int) -> Tuple[List[np.ndarray], List[str]]:
        basis, labels = [], []
        for a in range(1, n):
            for b in range(a + 1, n):
                basis.append((_unit(n, a, b) - _unit(n, b, a)).astype(complex))
                labels.append(f"E{a + 1}{b + 1}-E{b + 1}{a + 1}")
                basis.append(1j * (_unit(n, a, b) + _unit(n, b, a)))
                labels.append(f"i(E{a + 1}{b + 1}+E{b + 1}{a + 1})")
        return basis, labels

    def _build_su(self, n: int, realization: str) -> SpherePresentation:
        diagonal = np.full(n, -1.0)
        diagonal[0] = n - 1.0
        m0 = 1j * np.diag(diagonal) * np.sqrt(2.0 / (n * (n - 1)))
        m1, m1_labels = self._unitary_m1(n)
        h_basis, h_labels = self._unitary_offdiagonal(n)
        for a in range(1, n - 1):
            h_basis.append(1j * (_unit(n, a, a) - _unit(n, a + 1, a + 1)))
            h_labels.append(f"i(E{a + 1}{a + 1}-E{a + 2}{a + 2})")
        return self._presentation(SpaceName.SU, n, [m0] + m1, ["i diag(n-1,-1,..)"] + m1_labels, h_basis,
                                  h_labels, COMPLEX_TRACE_SCALE, "complex", [[0], list(range(1, 2 * n - 1))],
                                  2 * n - 1, [0, 1], True, "m0 carries a trivial isotropy action")

    def _build_u(self, n: int, realization: str) -> SpherePresentation:
        m0 = SQRT2 * 1j * _unit(n, 0, 0)
        m1, m1_labels = self._unitary_m1(n)
        h_basis, h_labels = self._unitary_offdiagonal(n)
        for a in range(1, n):
            h_basis.append(1j * _unit(n, a, a))
            h_labels.append(f"iE{a + 1}{a + 1}")
        return self._presentation(SpaceName.U, n, [m0] + m1, ["sqrt2 iE11"] + m1_labels, h_basis, h_labels,
                                  COMPLEX_TRACE_SCALE, "complex", [[0], list(range(1, 2 * n - 1))], 2 * n - 1,
                                  [0, 1], True)

    def _symplectic_m2(self, n: int, realization: str) -> Tuple[List[np.ndarray], List[str]]:
        basis, labels = [], []
        for k in range(1, n):
            basis.append(quaternion_matrix(n, {(0, k): ONE, (k, 0): qscale(ONE, -1.0)}, realization))
            labels.append(f"E1{k + 1}-E{k + 1}1")
            for name, unit in IMAGINARY_UNITS.items():
                basis.append(quaternion_matrix(n, {(0, k): unit, (k, 0): unit}, realization))
                labels.append(f"{name}(E1{k + 1}+E{k + 1}1)")
        return basis, labels

    def _corner(self, n: int, unit, realization: str, scale: float = 1.0) -> np.ndarray:
        return scale * quaternion_matrix(n, {(0, 0): unit}, realization)

    def _build_sp(self, n: int, realization: str) -> SpherePresentation:
        m1 = [self._corner(n, unit, realization, SQRT2) for unit in IMAGINARY_UNITS.values()]
        m1_labels = [f"sqrt2 {name}E11" for name in IMAGINARY_UNITS]
        m2, m2_labels = self._symplectic_m2(n, realization)
        h_basis, h_labels = sp_basis(range(1, n), n, realization)
        presentation = self._presentation(SpaceName.SP, n, m1 + m2, m1_labels + m2_labels, h_basis, h_labels,
                                          TRACE_SCALE[realization], realization, [[0, 1, 2], list(range(3, 4 * n - 1))],
                                          4 * n - 1, [0, 1, 2, 3], False,
                                          "GO exactly for norms with the larger Sp(n)Sp(1) symmetry")
        presentation.extra_symmetry = [self._restricted_ad(presentation, index) for index in (0, 1, 2)]
        return presentation

    def _restricted_ad(self, presentation: SpherePresentation, m_index: int) -> np.ndarray:
        """ad(e) on m for a basis vector e of m that normalizes m."""
        dec = presentation.decomposition
        full = dec.algebra.ad(dec.embed_m(np.eye(dec.m_dim)[m_index]))
        leak = float(np.max(np.abs(full[np.ix_(dec.h_indices, dec.m_indices)])))
        if leak > self.algebra_tol:
            raise NumericalError("Symmetry generator does not preserve m", {"leak": leak})
        return full[np.ix_(dec.m_indices, dec.m_indices)]

    def _build_sp_u1(self, n: int, realization: str) -> SpherePresentation:
        scale = TRACE_SCALE[realization]
        v0 = np.sqrt(scale / 4.0) * np.array([[0.0, 1.0], [-1.0, 0.0]])
        zero_tail = np.zeros((2, 2))
        i_corner = self._corner(n, IMAGINARY_UNITS["i"], realization)

        m_basis = [_direct_sum(i_corner, -v0)]
        m_basis += [_direct_sum(self._corner(n, IMAGINARY_UNITS[name], realization, SQRT2), zero_tail)
                    for name in ("j", "k")]
        m2, m2_labels = self._symplectic_m2(n, realization)
        m_basis += [_direct_sum(matrix, zero_tail) for matrix in m2]
        m_labels = ["iE11-v0", "sqrt2 jE11", "sqrt2 kE11"] + m2_labels

        sp_h, sp_labels = sp_basis(range(1, n), n, realization)
        h_basis = [_direct_sum(matrix, zero_tail) for matrix in sp_h] + [_direct_sum(i_corner, v0)]
        h_labels = sp_labels + ["iE11+v0"]
        return self._presentation(SpaceName.SP_U1, n, m_basis, m_labels, h_basis, h_labels, scale, realization,
                                  [[0], [1, 2], list(range(3, 4 * n - 1))], 4 * n - 1, [0, 1, 3], True,
                                  "v0 spans the u(1) factor with |v0|^2 = 1/2")

    def _build_sp_sp1(self, n: int, realization: str) -> SpherePresentation:
        scale = TRACE_SCALE[realization]
        zero_tail = np.zeros_like(realize(ONE, realization))
        m_basis, m_labels, h_extra = [], [], []
        for name, unit in IMAGINARY_UNITS.items():
            corner = self._corner(n, unit, realization)
            tail = realize(unit, realization)
            m_basis.append(_direct_sum(corner, -tail))
            m_labels.append(f"({name}E11,-{name})")
            h_extra.append(_direct_sum(corner, tail))
        m2, m2_labels = self._symplectic_m2(n, realization)
        m_basis += [_direct_sum(matrix, zero_tail) for matrix in m2]
        m_labels += m2_labels

        sp_h, sp_labels = sp_basis(range(1, n), n, realization)
        h_basis = [_direct_sum(matrix, zero_tail) for matrix in sp_h] + h_extra
        h_labels = sp_labels + [f"({name}E11,{name})" for name in IMAGINARY_UNITS]
        return self._presentation(SpaceName.SP_SP1, n, m_basis, m_labels, h_basis, h_labels, scale, realization,
                                  [[0, 1, 2], list(range(3, 4 * n - 1))], 4 * n - 1, [0, 3], True,
                                  "weakly symmetric")

    # ------------------------------------------------------------------ brackets and orbits

    def bracket(self, dec: ReductiveDecomposition, x, y) -> np.ndarray:
        """[x, y] in algebra coordinates."""
        x = as_vector(x, "x", dec.algebra.dim)
        y = as_vector(y, "y", dec.algebra.dim)
        return dec.algebra.bracket(x, y)

    def _as_m_vector(self, dec: ReductiveDecomposition, value, name: str) -> np.ndarray:
        vector = as_vector(value, name)
        if vector.shape[0] == dec.m_dim:
            return vector
        if vector.shape[0] != dec.algebra.dim:
            raise DimensionMismatchError(f"{name} must have dimension {dec.m_dim} (m) or {dec.algebra.dim} (g)",
                                         {"got": int(vector.shape[0])})
        leak = float(np.max(np.abs(vector[dec.h_indices]))) if dec.h_dim else 0.0
        if leak > self.algebra_tol:
            raise InvalidInputError(f"{name} is not in m", {"h_component": leak})
        return vector[dec.m_indices]

    def m_bracket(self, dec: ReductiveDecomposition, x, y) -> np.ndarray:
        """[x, y]_m in m coordinates (m and h are bi-orthogonal, so this is the projection)."""
        x = self._as_m_vector(dec, x, "x")
        y = self._as_m_vector(dec, y, "y")
        return np.einsum("a,b,abk->k", x, y, dec.m_bracket_tensor)

    def orbit_tangent(self, dec: ReductiveDecomposition, u) -> np.ndarray:
        """Rows [h_j, u] spanning T_u(Ad(H) u)."""
        u = self._as_m_vector(dec, u, "u")
        if dec.h_dim == 0:
            return np.zeros((0, dec.m_dim))
        return dec.isotropy_action @ u

    # ------------------------------------------------------------------ invariant checks

    def algebra_defects(self, algebra: LieAlgebra) -> Dict[str, float]:
        c = algebra.structure_constants
        nested = np.einsum("jlk,ikr->ijlr", c, c)
        jacobi = nested + np.einsum("abcr->cabr", nested) + np.einsum("abcr->bcar", nested)
        invariance = np.einsum("ijk,kl->ijl", c, algebra.bi_inner) + np.einsum("ilk,jk->ijl", c, algebra.bi_inner)
        return {
            "antisymmetry": float(np.max(np.abs(c + np.swapaxes(c, 0, 1)))),
            "jacobi": float(np.max(np.abs(jacobi))),
            "bi_invariance": float(np.max(np.abs(invariance))),
            "bi_min_eigenvalue": float(np.linalg.eigvalsh(algebra.bi_inner)[0]),
        }

    def presentation_defects(self, presentation: SpherePresentation) -> Dict[str, float]:
        """Largest violation of every structural identity of a presentation."""
        dec = presentation.decomposition
        algebra = dec.algebra
        c = algebra.structure_constants
        h, m = dec.h_indices, dec.m_indices
        defects = self.algebra_defects(algebra)
        defects["h_closed"] = float(np.max(np.abs(c[np.ix_(h, h, m)]))) if h else 0.0
        defects["reductive"] = float(np.max(np.abs(c[np.ix_(h, m, h)]))) if h else 0.0
        defects["orthogonal"] = float(np.max(np.abs(algebra.bi_inner[np.ix_(h, m)]))) if h else 0.0
        defects["m_orthonormal"] = float(np.max(np.abs(algebra.bi_inner[np.ix_(m, m)] - np.eye(len(m)))))
        leak = 0.0
        for block in presentation.m_blocks:
            outside = [k for k in range(dec.m_dim) if k not in block]
            if h and outside:
                leak = max(leak, float(np.max(np.abs(dec.isotropy_action[:, outside][:, :, block]))))
        defects["block_invariance"] = leak
        defects["sphere_dimension"] = float(abs(dec.m_dim - presentation.sphere_dim))
        return defects

    def check_presentation(self, presentation: SpherePresentation) -> Tuple[bool, Dict[str, float]]:
        defects = self.presentation_defects(presentation)
        bounded = {key: value for key, value in defects.items() if key != "bi_min_eigenvalue"}
        passed = all(value <= self.algebra_tol for value in bounded.values()) and defects["bi_min_eigenvalue"] > 0
        if not passed:
            logger.warning("Presentation %s violates structural identities: %s", presentation.display_name,
                           {key: value for key, value in bounded.items() if value > self.algebra_tol})
        return passed, defects

    def realization_agreement(self, name: str, n: int) -> float:
        """Max difference of structure constants between the real 4x4 and complex 2x2 quaternion realizations."""
        if name not in (SpaceName.SP, SpaceName.SP_U1, SpaceName.SP_SP1):
            raise ValidationError("Only the symplectic presentations have two quaternion realizations")
        real = self.build_presentation(name, n, "real4").decomposition.algebra
        complex_ = self.build_presentation(name, n, "complex2").decomposition.algebra
        return float(np.max(np.abs(real.structure_constants - complex_.structure_constants)))

    # ------------------------------------------------------------------ symmetry searches

    def check_weakly_symmetric(self, presentation: SpherePresentation, u, search_budget: Optional[int] = None,
                               seed: Optional[int] = None) -> WeakSymmetryResult:
        """Search exp(ad A1) exp(ad A2) with A1, A2 in h for an element reversing u."""
        dec = presentation.decomposition
        u = self._as_m_vector(dec, u, "u")
        scale = float(np.linalg.norm(u))
        if scale < CONFIG["ZERO_VECTOR_TOL"]:
            raise InvalidInputError("u must be nonzero")
        budget = CONFIG["WEAK_SYMMETRY_BUDGET"] if search_budget is None else search_budget
        tolerance = CONFIG["WEAK_SYMMETRY_TOL"]
        if dec.h_dim == 0:
            return WeakSymmetryResult(False, 2.0, 0, 0)

        generators = dec.isotropy_action
        target = u / scale
        rng = make_rng(CONFIG["SEED"] if seed is None else seed)

        def group_element(params: np.ndarray, depth: int) -> np.ndarray:
            element = np.eye(dec.m_dim)
            for factor in params.reshape(depth, dec.h_dim):
                element = element @ expm(np.tensordot(factor, generators, axes=1))
            return element

        best = np.inf
        attempts = 0
        for depth in (1, 2):
            for _ in range(max(1, budget // 2)):
                attempts += 1
                start = rng.normal(scale=np.pi, size=depth * dec.h_dim)
                fit = least_squares(lambda p: group_element(p, depth) @ target + target, start, method="trf",
                                    xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=400)
                residual = float(np.linalg.norm(group_element(fit.x, depth) @ target + target))
                best = min(best, residual)
                if residual < tolerance:
                    witness = fit.x.reshape(depth, dec.h_dim).tolist()
                    logger.info("Weak symmetry witness for %s at depth %d after %d attempts",
                                presentation.display_name, depth, attempts)
                    return WeakSymmetryResult(True, residual, depth, attempts, witness)
        logger.info("No weak symmetry witness for %s within %d attempts (best %.3e)",
                    presentation.display_name, attempts, best)
        return WeakSymmetryResult(False, best, 2, attempts)

    def symmetry_rows(self, norm: MinkowskiNorm, points: np.ndarray, generators: Sequence[np.ndarray]) -> np.ndarray:
        """R[s, a] = dF_u(Z_a u) at every sample u."""
        gradients = self.norm_service.gradients(norm, points)
        values = norm.values(points)[:, None]
        moved = np.einsum("aij,sj->sai", np.asarray(generators), points)
        return np.einsum("si,sai->sa", gradients / values, moved)

    def extra_symmetry_nullity(self, presentation: SpherePresentation, norm: MinkowskiNorm,
                               sample_count: Optional[int] = None, seed: Optional[int] = None) -> NullityResult:
        """Number of independent sp(1) directions, acting through Ad(diag(q, 1, ..)), under which F is invariant."""
        if not presentation.extra_symmetry:
            raise ValidationError(f"{presentation.display_name} declares no enlarged symmetry to test")
        if norm.dim != presentation.m_dim:
            raise DimensionMismatchError(f"Norm dimension {norm.dim} != dim m {presentation.m_dim}")
        count = CONFIG["NORM_SAMPLES"] if sample_count is None else sample_count
        points = sample_net(norm.dim, count, CONFIG["SEED"] if seed is None else seed)
        rows = self.symmetry_rows(norm, points, presentation.extra_symmetry)
        singular = np.linalg.svd(rows / np.sqrt(len(points)), compute_uv=False)
        rank = int(np.sum(singular > CONFIG["SYMMETRY_RANK_TOL"]))
        result = NullityResult(nullity=len(presentation.extra_symmetry) - rank,
                               singular_values=[float(value) for value in singular])
        logger.info("Extra symmetry nullity %d for %s", result.nullity, presentation.display_name)
        return result

#!/usr/bin/env python3
"""
Norm Service
Evaluation of Minkowski norms, fundamental tensors, Cartan tensors and family construction
"""

from typing import Callable, Dict, Optional, Tuple

import numpy as np

from gosphere.config.settings import CONFIG
from gosphere.models.norm.model import (
    EXPRESSION_FAMILIES,
    FamilyTag,
    FundamentalTensor,
    MetricFamilySpec,
    MinkowskiNorm,
)
from gosphere.services.expression.nodes import Expr, evaluate
from gosphere.services.expression.parser import FAMILY_VARIABLES, coordinate_variables, parse_expr
from gosphere.utils.errors import InvalidInputError, NotStronglyConvexError, ValidationError
from gosphere.utils.logger import get_logger
from gosphere.utils.numdiff import gradient_batch, hessian_batch, third_directional
from gosphere.utils.sampling import sample_net
from gosphere.utils.validation import as_vector

logger = get_logger(__name__)

HOMOGENEITY_FACTORS = (0.5, 2.0, 10.0)


def _quadratic(points: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    return np.einsum("mi,ij,mj->m", points, matrix, points)


def _zero_rows(points: np.ndarray) -> np.ndarray:
    return ~np.any(points != 0.0, axis=1)


def _broadcast(values, m: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(values, dtype=float), (m,)).copy()


def _family_evaluator(spec: MetricFamilySpec) -> Callable[[np.ndarray], np.ndarray]:
    """Batch evaluator for the family formula of a validated spec."""
    tag = FamilyTag(spec.family)
    alpha = spec.alpha()
    beta = spec.beta()
    tree: Optional[Expr] = None
    if tag in EXPRESSION_FAMILIES:
        allowed = coordinate_variables("y", spec.dim) if tag == FamilyTag.CUSTOM else FAMILY_VARIABLES
        tree = parse_expr(spec.f_expr, allowed)

    def value(points: np.ndarray) -> np.ndarray:
        m = points.shape[0]
        if tag == FamilyTag.RIEMANNIAN:
            return np.sqrt(np.maximum(_quadratic(points, alpha), 0.0))
        if tag == FamilyTag.RANDERS:
            return np.sqrt(np.maximum(_quadratic(points, alpha), 0.0)) + points @ beta
        if tag == FamilyTag.ALPHA_BETA:
            a = np.sqrt(np.maximum(_quadratic(points, alpha), 0.0))
            safe = np.where(a > 0.0, a, 1.0)
            s = np.where(a > 0.0, (points @ beta) / safe, 0.0)
            return a * _broadcast(evaluate(tree, {"s1": s}), m)
        if tag == FamilyTag.CUSTOM:
            env = {name: points[:, i] for i, name in enumerate(coordinate_variables("y", spec.dim))}
            return _broadcast(evaluate(tree, env), m)

        offsets = np.cumsum([0] + list(spec.blocks))
        blocks = [slice(offsets[i], offsets[i + 1]) for i in range(len(spec.blocks))]
        env: Dict[str, np.ndarray] = {}
        squares = []
        for block in blocks[-2:]:
            sub = points[:, block]
            squares.append(_quadratic(sub, alpha[block, block]))
        if tag == FamilyTag.ALPHA12:
            env["s1"], env["s2"] = squares
        else:
            env["s1"] = points @ beta
            env["s2"], env["s3"] = squares
        return _broadcast(evaluate(tree, env), m)

    def guarded(points: np.ndarray) -> np.ndarray:
        result = value(points)
        result[_zero_rows(points)] = 0.0
        return result

    return guarded


class NormService:
    """Numerical operations on Minkowski norms"""

    def __init__(self):
        self.hessian_step = CONFIG["HESSIAN_STEP"]
        self.gradient_step = CONFIG["GRADIENT_STEP"]
        self.cartan_step = CONFIG["CARTAN_STEP"]
        self.levels = CONFIG["RICHARDSON_LEVELS"]
        self.convexity_ratio = CONFIG["CONVEXITY_RATIO"]

    # ------------------------------------------------------------------ evaluation

    def values(self, norm: MinkowskiNorm, points) -> np.ndarray:
        """F at every row; zero rows give 0, non-finite input is rejected."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != norm.dim:
            raise InvalidInputError(f"Expected vectors of dimension {norm.dim}", {"got": points.shape[1]})
        if not np.all(np.isfinite(points)):
            raise InvalidInputError("Input vector has non-finite components")
        return norm.values(points)

    def eval(self, norm: MinkowskiNorm, y) -> float:
        return float(self.values(norm, as_vector(y, "y", norm.dim)[None, :])[0])

    def _slit(self, norm: MinkowskiNorm, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != norm.dim:
            raise InvalidInputError(f"Expected vectors of dimension {norm.dim}", {"got": points.shape[1]})
        if not np.all(np.isfinite(points)):
            raise InvalidInputError("Input vector has non-finite components")
        small = np.linalg.norm(points, axis=1) < CONFIG["ZERO_VECTOR_TOL"]
        if np.any(small):
            raise InvalidInputError("Tensor operations need y != 0", {"y": points[np.argmax(small)]})
        return points

    def _square(self, norm: MinkowskiNorm) -> Callable[[np.ndarray], np.ndarray]:
        return lambda points: norm.values(points) ** 2

    # ------------------------------------------------------------------ derivatives

    def gradients(self, norm: MinkowskiNorm, points) -> np.ndarray:
        """p = 1/2 grad(F^2) at every row, so that g_y(y, w) = p . w."""
        points = self._slit(norm, points)
        steps = self.gradient_step * np.linalg.norm(points, axis=1)
        return 0.5 * gradient_batch(self._square(norm), points, steps, self.levels)

    def fundamental_tensors(self, norm: MinkowskiNorm, points, check: bool = True) -> np.ndarray:
        """g_y for every row, shape (m, n, n)."""
        points = self._slit(norm, points)
        steps = self.hessian_step * np.linalg.norm(points, axis=1)
        _, hessians = hessian_batch(self._square(norm), points, steps, self.levels)
        tensors = 0.25 * (hessians + np.swapaxes(hessians, 1, 2))
        if check:
            self._check_definite(points, tensors)
        return tensors

    def _check_definite(self, points: np.ndarray, tensors: np.ndarray) -> None:
        if not np.all(np.isfinite(tensors)):
            bad = int(np.argmax(~np.all(np.isfinite(tensors), axis=(1, 2))))
            raise NotStronglyConvexError("Fundamental tensor is not finite", points[bad])
        eigenvalues = np.linalg.eigvalsh(tensors)
        ratio = eigenvalues[:, 0] / np.maximum(np.abs(eigenvalues[:, -1]), np.finfo(float).tiny)
        failing = np.flatnonzero(ratio < self.convexity_ratio)
        if failing.size:
            worst = failing[np.argmin(ratio[failing])]
            raise NotStronglyConvexError(
                f"Fundamental tensor is not positive definite (min/max eigenvalue {ratio[worst]:.3e})",
                points[worst],
                float(ratio[worst]),
            )

    def fundamental_tensor(self, norm: MinkowskiNorm, y) -> FundamentalTensor:
        y = as_vector(y, "y", norm.dim)
        matrix = self.fundamental_tensors(norm, y[None, :])[0]
        return FundamentalTensor(base=y, matrix=matrix)

    def cartan_batch(self, norm: MinkowskiNorm, points, u, v, w) -> np.ndarray:
        """C_y(u, v, w) = 1/4 D^3(F^2)[u, v, w] for every row y."""
        points = self._slit(norm, points)
        steps = self.cartan_step * np.linalg.norm(points, axis=1)
        return 0.25 * third_directional(self._square(norm), points, u, v, w, steps, self.levels)

    def cartan(self, norm: MinkowskiNorm, y, u, v, w) -> float:
        y = as_vector(y, "y", norm.dim)
        vectors = [as_vector(item, name, norm.dim) for item, name in ((u, "u"), (v, "v"), (w, "w"))]
        return float(self.cartan_batch(norm, y[None, :], *vectors)[0])

    # ------------------------------------------------------------------ checks

    def check_homogeneity(self, norm: MinkowskiNorm, points) -> float:
        """Largest relative defect of F(ty) = tF(y) over the sample points."""
        points = np.atleast_2d(points)
        base = norm.values(points)
        worst = 0.0
        for factor in HOMOGENEITY_FACTORS:
            scaled = norm.values(factor * points)
            with np.errstate(divide="ignore", invalid="ignore"):
                defect = np.abs(scaled - factor * base) / np.abs(factor * base)
            worst = max(worst, float(np.nanmax(np.where(np.isfinite(defect), defect, np.inf))))
        return worst

    def check_strong_convexity(self, norm: MinkowskiNorm, points) -> None:
        """Raise NotStronglyConvexError at the first sampled witness."""
        points = np.atleast_2d(points)
        values = norm.values(points)
        bad = np.flatnonzero(~(np.isfinite(values) & (values > 0.0)))
        if bad.size:
            raise NotStronglyConvexError("Norm is not positive at a sampled direction", points[bad[0]])
        self.fundamental_tensors(norm, points, check=True)

    def check_reversible(self, norm: MinkowskiNorm, sample_count: int,
                         seed: Optional[int] = None) -> Tuple[bool, float]:
        """True iff max |F(y) - F(-y)| / F(y) over the net stays below the reversibility tolerance."""
        if sample_count < 1:
            raise ValidationError("sample_count must be >= 1")
        points = sample_net(norm.dim, sample_count, CONFIG["SEED"] if seed is None else seed)
        forward = norm.values(points)
        backward = norm.values(-points)
        asymmetry = float(np.max(np.abs(forward - backward) / forward))
        return asymmetry < CONFIG["REVERSIBLE_TOL"], asymmetry

    def max_cartan(self, norm: MinkowskiNorm, sample_count: int, seed: Optional[int] = None) -> float:
        """Largest |C_y(u, v, w)| over random unit y, u, v, w."""
        rng = np.random.default_rng(CONFIG["SEED"] if seed is None else seed)
        vectors = rng.standard_normal((4, sample_count, norm.dim))
        vectors /= np.linalg.norm(vectors, axis=2, keepdims=True)
        values = np.array([
            self.cartan_batch(norm, vectors[0][i:i + 1], vectors[1][i], vectors[2][i], vectors[3][i])[0]
            for i in range(sample_count)
        ])
        return float(np.max(np.abs(values)))

    # ------------------------------------------------------------------ construction

    def make_family(self, spec: MetricFamilySpec, sample_count: Optional[int] = None,
                    seed: Optional[int] = None) -> MinkowskiNorm:
        """Build and sample-check a norm from a family spec."""
        errors = spec.validate()
        if errors:
            raise ValidationError(f"Invalid metric spec: {'; '.join(errors)}", {"errors": errors})
        if spec.alpha_matrix is not None and np.linalg.eigvalsh(spec.alpha())[0] <= 0.0:
            raise ValidationError("alpha_matrix must be positive definite")

        tag = FamilyTag(spec.family)
        reversible_hint = None
        if tag in (FamilyTag.RIEMANNIAN, FamilyTag.ALPHA12):
            reversible_hint = True
        elif tag == FamilyTag.RANDERS:
            reversible_hint = not np.any(spec.beta() != 0.0)

        norm = MinkowskiNorm(
            dim=spec.dim,
            value=_family_evaluator(spec),
            family_tag=tag,
            reversible_hint=reversible_hint,
            spec=spec,
            label=spec.f_expr or tag.value,
        )

        count = CONFIG["NORM_SAMPLES"] if sample_count is None else sample_count
        points = sample_net(spec.dim, count, CONFIG["SEED"] if seed is None else seed)
        defect = self.check_homogeneity(norm, points)
        if not defect < CONFIG["HOMOGENEITY_TOL"]:
            raise ValidationError(f"Family function is not positively 1-homogeneous (defect {defect:.3e})",
                                  {"defect": defect})
        self.check_strong_convexity(norm, points)
        logger.info("Built %s norm on R^%d (%d sample directions)", tag.value, spec.dim, len(points))
        return norm

    def riemannian(self, matrix) -> MinkowskiNorm:
        matrix = np.asarray(matrix, dtype=float)
        spec = MetricFamilySpec(family=FamilyTag.RIEMANNIAN.value, dim=matrix.shape[0],
                                alpha_matrix=matrix.tolist())
        return self.make_family(spec)

    def randers(self, matrix, covector) -> MinkowskiNorm:
        matrix = np.asarray(matrix, dtype=float)
        spec = MetricFamilySpec(family=FamilyTag.RANDERS.value, dim=matrix.shape[0], alpha_matrix=matrix.tolist(),
                                beta_covector=np.asarray(covector, dtype=float).tolist())
        return self.make_family(spec)

    def euclidean(self, dim: int) -> MinkowskiNorm:
        return self.riemannian(np.eye(dim))

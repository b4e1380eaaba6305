#!/usr/bin/env python3
"""
Geodesic Orbit Check Service
Spray vector, the compensator and orbit-tangency tests, and sampled verdicts with certificates
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import expm

from gosphere.config.settings import CONFIG
from gosphere.models.certificate.model import GOCertificate, GOVerdict, SprayVector, Verdict
from gosphere.models.norm.model import FamilyTag, MetricFamilySpec, MinkowskiNorm
from gosphere.models.presentation.model import SpaceName, SpherePresentation
from gosphere.services.liealg.service import LieAlgService
from gosphere.services.norms.service import NormService
from gosphere.utils.errors import DimensionMismatchError, InvalidInputError, ValidationError
from gosphere.utils.logger import get_logger
from gosphere.utils.sampling import make_rng, unit_directions

logger = get_logger(__name__)

# samples per worker task
CHUNK_SIZE = 32


class GOCheckService:
    """Sampled test of the geodesic-orbit property of an invariant norm on m"""

    def __init__(self, norm_service: Optional[NormService] = None, liealg_service: Optional[LieAlgService] = None):
        self.norm_service = norm_service or NormService()
        self.liealg_service = liealg_service or LieAlgService(self.norm_service)

    # ------------------------------------------------------------------ helpers

    def _check_dimensions(self, presentation: SpherePresentation, norm: MinkowskiNorm) -> None:
        if norm.dim != presentation.m_dim:
            raise DimensionMismatchError(
                f"Norm dimension {norm.dim} does not match dim m = {presentation.m_dim} of "
                f"{presentation.display_name}", {"norm_dim": norm.dim, "m_dim": presentation.m_dim})

    def _sample(self, presentation: SpherePresentation, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (presentation.m_dim,):
            raise DimensionMismatchError(f"u must have dimension {presentation.m_dim}")
        if not np.all(np.isfinite(u)):
            raise InvalidInputError("u has non-finite components")
        if np.linalg.norm(u) < CONFIG["ZERO_VECTOR_TOL"]:
            raise InvalidInputError("u must be nonzero")
        return u

    def _isotropy_combination(self, presentation: SpherePresentation, u_prime: np.ndarray) -> np.ndarray:
        action = presentation.decomposition.isotropy_action
        if len(action) == 0:
            return np.zeros((presentation.m_dim, presentation.m_dim))
        return np.tensordot(u_prime, action, axes=1)

    def _batch_terms(self, presentation: SpherePresentation, norm: MinkowskiNorm, points: np.ndarray):
        """Fundamental tensors, p = g_u u and F at every sample."""
        tensors = self.norm_service.fundamental_tensors(norm, points)
        momenta = self.norm_service.gradients(norm, points)
        values = norm.values(points)
        return tensors, momenta, values

    def _spray_from_terms(self, presentation: SpherePresentation, u: np.ndarray, tensor: np.ndarray,
                          momentum: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        # B[i, k]: m-coordinate k of [e_i, u]_m
        brackets = np.einsum("ibk,b->ik", presentation.decomposition.m_bracket_tensor, u)
        rhs = brackets @ momentum
        return np.linalg.solve(tensor, rhs), rhs

    # ------------------------------------------------------------------ single-sample operations

    def spray_vector(self, presentation: SpherePresentation, norm: MinkowskiNorm, u) -> SprayVector:
        """eta(u) = g_u^{-1} r with r_i = g_u(u, [e_i, u]_m)."""
        self._check_dimensions(presentation, norm)
        u = self._sample(presentation, u)
        tensors, momenta, values = self._batch_terms(presentation, norm, u[None, :])
        value, rhs = self._spray_from_terms(presentation, u, tensors[0], momenta[0])
        scale = max(float(np.linalg.norm(rhs)), float(np.dot(u, u)) * float(values[0]) ** 2)
        residual = float(np.linalg.norm(tensors[0] @ value - rhs)) / scale
        return SprayVector(base=u, value=value, defining_residual=residual)

    def _condition3(self, presentation: SpherePresentation, u: np.ndarray, momentum: np.ndarray,
                    value: float) -> Tuple[np.ndarray, float]:
        dec = presentation.decomposition
        # b_v = g_u(u, [u, e_v]_m)
        b = -np.einsum("ibk,b,k->i", dec.m_bracket_tensor, u, momentum)
        scale = float(np.dot(u, u)) * value ** 2
        if dec.h_dim == 0:
            return np.zeros(0), float(np.linalg.norm(b)) / scale
        # M[v, j] = g_u(u, ad(h_j) e_v)
        matrix = np.einsum("jkv,k->vj", dec.isotropy_action, momentum)
        u_prime, *_ = np.linalg.lstsq(matrix, -b, rcond=None)
        return u_prime, float(np.linalg.norm(b + matrix @ u_prime)) / scale

    def _condition4(self, presentation: SpherePresentation, u: np.ndarray, tensor: np.ndarray, eta: np.ndarray,
                    value: float) -> float:
        scale = float(np.linalg.norm(u)) * value
        tangents = self.liealg_service.orbit_tangent(presentation.decomposition, u)
        factor = np.linalg.cholesky(tensor)
        target = factor.T @ eta
        if len(tangents) == 0:
            return float(np.linalg.norm(target)) / scale
        # least squares in the g_u metric: |L^T (eta - T^T c)|
        design = factor.T @ tangents.T
        coefficients, *_ = np.linalg.lstsq(design, target, rcond=None)
        return float(np.linalg.norm(target - design @ coefficients)) / scale

    def condition3_compensator(self, presentation: SpherePresentation, norm: MinkowskiNorm,
                               u) -> Tuple[np.ndarray, float]:
        """Minimum-norm u' in h minimizing sum_v g_u(u, [u + u', e_v]_m)^2, and the normalized residual."""
        self._check_dimensions(presentation, norm)
        u = self._sample(presentation, u)
        momenta = self.norm_service.gradients(norm, u[None, :])
        return self._condition3(presentation, u, momenta[0], float(norm.values(u[None, :])[0]))

    def condition4_residual(self, presentation: SpherePresentation, norm: MinkowskiNorm, u) -> float:
        """g_u-distance of eta(u) from T_u(Ad(H) u), normalized by |u| F(u)."""
        self._check_dimensions(presentation, norm)
        u = self._sample(presentation, u)
        tensors, momenta, values = self._batch_terms(presentation, norm, u[None, :])
        eta, _ = self._spray_from_terms(presentation, u, tensors[0], momenta[0])
        return self._condition4(presentation, u, tensors[0], eta, float(values[0]))

    def cartan_bracket_identity_check(self, presentation: SpherePresentation, norm: MinkowskiNorm, u, u_prime,
                                      v) -> float:
        """|g_u(u, [u', v]) - g_u([u, u'], v) + 2 C_u(u, v, [u', u])| for u' in h and u, v in m."""
        self._check_dimensions(presentation, norm)
        u = self._sample(presentation, u)
        u_prime = np.asarray(u_prime, dtype=float)
        v = np.asarray(v, dtype=float)
        if u_prime.shape != (presentation.decomposition.h_dim,):
            raise DimensionMismatchError(f"u' must have dimension {presentation.decomposition.h_dim}")
        if v.shape != (presentation.m_dim,):
            raise DimensionMismatchError(f"v must have dimension {presentation.m_dim}")
        action = self._isotropy_combination(presentation, u_prime)
        tensor = self.norm_service.fundamental_tensor(norm, u).matrix
        moved_u = action @ u  # [u', u]
        lhs = u @ tensor @ (action @ v)
        cartan = self.norm_service.cartan(norm, u, u, v, moved_u)
        rhs = (-moved_u) @ tensor @ v - 2.0 * cartan
        return float(abs(lhs - rhs))

    def equivariance_defect(self, presentation: SpherePresentation, norm: MinkowskiNorm, u, h_index: int,
                            dt: Optional[float] = None) -> float:
        """|d/dt eta(exp(t ad h) u) at 0 - ad(h) eta(u)| relative to |u|^2, by central differences."""
        u = self._sample(presentation, u)
        if not 0 <= h_index < presentation.decomposition.h_dim:
            raise ValidationError(f"h_index must be in [0, {presentation.decomposition.h_dim})")
        step = CONFIG["EQUIVARIANCE_STEP"] if dt is None else dt
        generator = presentation.decomposition.isotropy_action[h_index]
        forward = self.spray_vector(presentation, norm, expm(step * generator) @ u).value
        backward = self.spray_vector(presentation, norm, expm(-step * generator) @ u).value
        derivative = (forward - backward) / (2.0 * step)
        expected = generator @ self.spray_vector(presentation, norm, u).value
        scale = float(np.dot(u, u)) * max(1.0, float(np.linalg.norm(generator, 2)))
        return float(np.linalg.norm(derivative - expected)) / scale

    # ------------------------------------------------------------------ sample nets and verdicts

    def sample_net(self, presentation: SpherePresentation, sample_count: int,
                   seed: Optional[int] = None) -> Tuple[np.ndarray, List[str]]:
        """Unit samples: one per m-block, then slice samples, then random control samples."""
        rng = make_rng(CONFIG["SEED"] if seed is None else seed)
        d = presentation.m_dim
        rows: List[np.ndarray] = []
        sources: List[str] = []
        for block in presentation.m_blocks:
            vector = np.zeros(d)
            vector[block] = unit_directions(len(block), 1, rng)[0]
            rows.append(vector)
            sources.append("block")
        remaining = max(sample_count - len(rows), 0)
        slice_indices = presentation.slice_indices or []
        slice_count = remaining // 2 if slice_indices else 0
        if slice_count:
            partial = np.zeros((slice_count, d))
            partial[:, slice_indices] = unit_directions(len(slice_indices), slice_count, rng)
            rows.extend(partial)
            sources.extend(["slice"] * slice_count)
        random_count = remaining - slice_count
        if random_count:
            rows.extend(unit_directions(d, random_count, rng))
            sources.extend(["random"] * random_count)
        return np.array(rows[:sample_count]), sources[:sample_count]

    def _certificates(self, presentation: SpherePresentation, norm: MinkowskiNorm, points: np.ndarray,
                      offset: int, tolerance: float, seed: Optional[int], sources: List[str]) -> List[GOCertificate]:
        tensors, momenta, values = self._batch_terms(presentation, norm, points)
        certificates = []
        for row, u in enumerate(points):
            eta, _ = self._spray_from_terms(presentation, u, tensors[row], momenta[row])
            u_prime, residual3 = self._condition3(presentation, u, momenta[row], float(values[row]))
            residual4 = self._condition4(presentation, u, tensors[row], eta, float(values[row]))
            certificates.append(GOCertificate(index=offset + row, u=u.tolist(), u_prime=u_prime.tolist(),
                                              residual3=residual3, residual4=residual4, tolerance=tolerance,
                                              seed=seed, source=sources[row]))
        return certificates

    def go_verdict(self, presentation: SpherePresentation, norm: MinkowskiNorm, sample_count: Optional[int] = None,
                   tolerance: Optional[float] = None, seed: Optional[int] = None,
                   workers: Optional[int] = None) -> GOVerdict:
        """PASS iff max residual4 over the sample net is below tolerance; FAIL above the failure threshold."""
        self._check_dimensions(presentation, norm)
        count = CONFIG["GO_SAMPLES"] if sample_count is None else sample_count
        if count < 1:
            raise ValidationError("sample_count must be >= 1")
        tol = CONFIG["GO_TOL"] if tolerance is None else tolerance
        fail_threshold = max(CONFIG["FAIL_THRESHOLD"], tol)
        seed = CONFIG["SEED"] if seed is None else seed
        workers = CONFIG["WORKERS"] if workers is None else workers

        points, sources = self.sample_net(presentation, count, seed)
        chunks = [(start, points[start:start + CHUNK_SIZE]) for start in range(0, len(points), CHUNK_SIZE)]
        results: Dict[int, List[GOCertificate]] = {}
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                futures = {
                    executor.submit(self._certificates, presentation, norm, chunk, start, tol, seed,
                                    sources[start:start + len(chunk)]): start
                    for start, chunk in chunks
                }
                for future in as_completed(futures):
                    results[futures[future]] = future.result()
        else:
            for start, chunk in chunks:
                results[start] = self._certificates(presentation, norm, chunk, start, tol, seed,
                                                    sources[start:start + len(chunk)])

        certificates = [certificate for start in sorted(results) for certificate in results[start]]
        max3 = max(certificate.residual3 for certificate in certificates)
        max4 = max(certificate.residual4 for certificate in certificates)
        verdict = Verdict.from_residual(max4, tol, fail_threshold)
        witness = None if verdict == Verdict.PASS else max(certificates, key=lambda c: c.residual4)
        agree = all(certificate.consistent for certificate in certificates)
        if not agree:
            logger.warning("Conditions (3) and (4) disagree on %d of %d samples for %s",
                           sum(not c.consistent for c in certificates), len(certificates), presentation.display_name)
        logger.info("GO verdict %s for %s (max residual4 %.3e over %d samples)", verdict,
                    presentation.display_name, max4, len(certificates))
        return GOVerdict(verdict=verdict, presentation=presentation.display_name, tolerance=tol,
                         fail_threshold=fail_threshold, sample_count=len(certificates), seed=seed,
                         max_residual3=max3, max_residual4=max4, conditions_agree=agree,
                         certificates=certificates, witness=witness)

    # ------------------------------------------------------------------ invariant norms

    def check_invariant(self, presentation: SpherePresentation, norm: MinkowskiNorm,
                        sample_count: Optional[int] = None, seed: Optional[int] = None) -> float:
        """max |dF_u(ad(h_j) u)| / |u| over an h-basis and a sample net."""
        self._check_dimensions(presentation, norm)
        if presentation.decomposition.h_dim == 0:
            return 0.0
        count = CONFIG["NORM_SAMPLES"] if sample_count is None else sample_count
        points, _ = self.sample_net(presentation, count, seed)
        rows = self.liealg_service.symmetry_rows(norm, points, presentation.decomposition.isotropy_action)
        return float(np.max(np.abs(rows)))

    def expected_verdict(self, presentation: SpherePresentation, norm: Optional[MinkowskiNorm] = None,
                         sample_count: Optional[int] = None, seed: Optional[int] = None) -> Tuple[bool, Dict]:
        """Predicted GO outcome; on Sp(n)/Sp(n-1) it depends on the norm's extra symmetry."""
        if not presentation.extra_symmetry or norm is None:
            return presentation.expected_go_verdict, {}
        nullity = self.liealg_service.extra_symmetry_nullity(presentation, norm, sample_count, seed)
        return nullity.nullity == len(presentation.extra_symmetry), nullity.to_dict()

    def random_invariant_norm(self, presentation: SpherePresentation, rng: np.random.Generator,
                              generic: bool = False) -> MetricFamilySpec:
        """An Ad(H)-invariant norm of the family the presentation admits.

        `generic` asks Sp(n)/Sp(n-1) for a norm without the Sp(n)Sp(1) symmetry.
        """
        d = presentation.m_dim
        name = presentation.name
        if name == SpaceName.SO:
            return MetricFamilySpec(family=FamilyTag.RIEMANNIAN.value, dim=d,
                                    alpha_matrix=(rng.uniform(0.5, 2.0) * np.eye(d)).tolist())
        if name in (SpaceName.SU, SpaceName.U):
            weights = np.full(d, rng.uniform(0.6, 1.8))
            weights[0] = rng.uniform(0.6, 1.8)
            beta = np.zeros(d)
            beta[0] = rng.uniform(-0.3, 0.3)
            f_expr = ["1+s1", "(1+s1)^2", "sqrt(1+s1^2)+s1"][int(rng.integers(3))]
            return MetricFamilySpec(family=FamilyTag.ALPHA_BETA.value, dim=d, f_expr=f_expr,
                                    alpha_matrix=np.diag(weights).tolist(), beta_covector=beta.tolist())
        if name == SpaceName.SP and generic:
            weights = np.ones(d)
            weights[:3] = rng.uniform(0.6, 2.5, size=3)
            while np.ptp(weights[:3]) < 0.2:
                weights[:3] = rng.uniform(0.6, 2.5, size=3)
            return MetricFamilySpec(family=FamilyTag.RIEMANNIAN.value, dim=d, alpha_matrix=np.diag(weights).tolist())
        if name in (SpaceName.SP, SpaceName.SP_SP1):
            a, b = rng.uniform(0.5, 2.0, size=2)
            k = rng.uniform(0.0, 0.5)
            f_expr = f"sqrt({a:.6f}*s1+{b:.6f}*s2+{k:.6f}*sqrt(s1^2+s2^2))"
            return MetricFamilySpec(family=FamilyTag.ALPHA12.value, dim=d, blocks=[3, d - 3], f_expr=f_expr)
        a, b = rng.uniform(0.5, 2.0, size=2)
        k = rng.uniform(0.0, 0.5)
        c = rng.uniform(-0.3, 0.3) * np.sqrt(min(a, b, 1.0))
        f_expr = f"sqrt({a:.6f}*s1^2+{b:.6f}*s2+s3+{k:.6f}*sqrt(s1^4+s2^2+s3^2))+{c:.6f}*s1"
        return MetricFamilySpec(family=FamilyTag.ALPHA12_BETA.value, dim=d, blocks=[1, 2, d - 3], f_expr=f_expr)

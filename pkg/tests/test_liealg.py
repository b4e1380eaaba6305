"""Quaternion realizations, sphere presentations and symmetry searches."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gosphere.models.presentation.model import LieAlgebra, SpaceName
from gosphere.services.liealg.quaternion import IMAGINARY_UNITS, complex2, left_real4, qmul
from gosphere.utils.errors import InvalidInputError, NumericalError, OutOfScopeError, ValidationError

quaternions = st.tuples(*[st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)] * 4)

SPACES = [(SpaceName.SO, 3), (SpaceName.SO, 4), (SpaceName.SU, 3), (SpaceName.U, 2), (SpaceName.U, 3),
          (SpaceName.SP, 2), (SpaceName.SP_U1, 2), (SpaceName.SP_SP1, 2)]


class TestQuaternions:
    def test_unit_products(self):
        i, j, k = IMAGINARY_UNITS.values()
        assert qmul(i, j) == k
        assert qmul(j, k) == i
        assert qmul(k, i) == j
        assert qmul(i, i) == (-1.0, 0.0, 0.0, 0.0)

    @settings(max_examples=50, deadline=None)
    @given(p=quaternions, q=quaternions)
    def test_realizations_are_homomorphisms(self, p, q):
        product = qmul(p, q)
        assert np.allclose(left_real4(product), left_real4(p) @ left_real4(q), atol=1e-12)
        assert np.allclose(complex2(product), complex2(p) @ complex2(q), atol=1e-12)


class TestPresentations:
    @pytest.mark.parametrize("name, n", SPACES)
    def test_structural_identities_hold(self, liealg_service, name, n):
        presentation = liealg_service.build_presentation(name, n)
        passed, defects = liealg_service.check_presentation(presentation)
        assert passed, defects
        assert presentation.m_dim == presentation.sphere_dim
        assert sorted(sum(presentation.m_blocks, [])) == list(range(presentation.m_dim))

    @pytest.mark.parametrize("name", [SpaceName.SP, SpaceName.SP_U1, SpaceName.SP_SP1])
    def test_quaternion_realizations_agree(self, liealg_service, name):
        assert liealg_service.realization_agreement(name, 2) < 1e-12

    def test_realization_agreement_needs_symplectic_space(self, liealg_service):
        with pytest.raises(ValidationError):
            liealg_service.realization_agreement(SpaceName.SO, 3)

    def test_sphere_dimensions(self, liealg_service):
        assert liealg_service.build_presentation(SpaceName.SO, 4).sphere_dim == 3
        assert liealg_service.build_presentation(SpaceName.U, 3).sphere_dim == 5
        assert liealg_service.build_presentation(SpaceName.SP_U1, 2).sphere_dim == 7

    def test_expected_verdicts(self, liealg_service):
        assert liealg_service.build_presentation(SpaceName.SP_U1, 2).expected_go_verdict
        assert not liealg_service.build_presentation(SpaceName.SP, 2).expected_go_verdict

    @pytest.mark.parametrize("name", SpaceName.EXCEPTIONAL)
    def test_exceptional_spaces_are_out_of_scope(self, liealg_service, name):
        with pytest.raises(OutOfScopeError):
            liealg_service.build_presentation(name, 2)

    @pytest.mark.parametrize("name, n, realization", [
        (SpaceName.SO, 2, "real4"),
        ("sl", 3, "real4"),
        (SpaceName.SP, 2, "octonion"),
    ])
    def test_invalid_requests(self, liealg_service, name, n, realization):
        with pytest.raises(ValidationError):
            liealg_service.build_presentation(name, n, realization)

    def test_algebra_dict_round_trip(self, sp_u1):
        algebra = sp_u1.decomposition.algebra
        restored = LieAlgebra.from_dict(algebra.to_dict())
        assert np.array_equal(restored.structure_constants, algebra.structure_constants)
        assert restored.basis_labels == algebra.basis_labels

    def test_dependent_basis_rejected(self, liealg_service):
        x = np.array([[0.0, 1.0], [-1.0, 0.0]])
        with pytest.raises(NumericalError):
            liealg_service.algebra_from_matrices([x, 2.0 * x], ["x", "2x"], 2.0)


class TestBrackets:
    def test_bracket_is_antisymmetric(self, liealg_service, sp_u1, rng):
        dec = sp_u1.decomposition
        x, y = rng.standard_normal((2, dec.algebra.dim))
        assert np.allclose(liealg_service.bracket(dec, x, y), -liealg_service.bracket(dec, y, x), atol=1e-12)

    def test_symmetric_pair_has_no_m_bracket(self, liealg_service, rng):
        dec = liealg_service.build_presentation(SpaceName.SO, 4).decomposition
        x, y = rng.standard_normal((2, dec.m_dim))
        assert np.allclose(liealg_service.m_bracket(dec, x, y), 0.0, atol=1e-12)

    def test_m_bracket_of_sp_is_nonzero(self, liealg_service, sp):
        dec = sp.decomposition
        eye = np.eye(dec.m_dim)
        assert np.linalg.norm(liealg_service.m_bracket(dec, eye[0], eye[1])) > 0.5

    def test_orbit_tangent_is_orthogonal(self, liealg_service, sp_u1, rng):
        dec = sp_u1.decomposition
        u = rng.standard_normal(dec.m_dim)
        tangent = liealg_service.orbit_tangent(dec, u)
        assert tangent.shape == (dec.h_dim, dec.m_dim)
        assert np.allclose(tangent @ u, 0.0, atol=1e-12)

    def test_full_vector_with_h_component_rejected(self, liealg_service, sp_u1):
        dec = sp_u1.decomposition
        vector = np.zeros(dec.algebra.dim)
        vector[dec.h_indices[0]] = 1.0
        with pytest.raises(InvalidInputError):
            liealg_service.orbit_tangent(dec, vector)


class TestSymmetry:
    def test_round_sphere_pair_is_weakly_symmetric(self, liealg_service):
        presentation = liealg_service.build_presentation(SpaceName.SO, 3)
        result = liealg_service.check_weakly_symmetric(presentation, [1.0, 0.5], search_budget=8)
        assert result.found and result.residual < 1e-6

    def test_trivial_isotropy_direction_cannot_be_reversed(self, liealg_service, sp):
        u = np.eye(sp.m_dim)[0]
        result = liealg_service.check_weakly_symmetric(sp, u, search_budget=4)
        assert not result.found
        assert result.residual > 1.0

    def test_zero_vector_rejected(self, liealg_service, sp):
        with pytest.raises(InvalidInputError):
            liealg_service.check_weakly_symmetric(sp, np.zeros(sp.m_dim))

    @pytest.mark.parametrize("diagonal, nullity, symmetry", [
        ([1.0, 1.0, 1.0], 3, "Sp(n)Sp(1)"),
        ([1.1, 1.0, 1.0], 1, "Sp(n)U(1)"),
        ([1.1, 1.2, 1.0], 0, "Sp(n)"),
    ])
    def test_extra_symmetry_nullity(self, liealg_service, norm_service, sp, diagonal, nullity, symmetry):
        matrix = np.diag(diagonal + [1.0] * (sp.m_dim - 3))
        result = liealg_service.extra_symmetry_nullity(sp, norm_service.riemannian(matrix), sample_count=16)
        assert result.nullity == nullity
        assert result.symmetry == symmetry

    def test_nullity_needs_declared_symmetry(self, liealg_service, norm_service, sp_u1):
        with pytest.raises(ValidationError):
            liealg_service.extra_symmetry_nullity(sp_u1, norm_service.euclidean(sp_u1.m_dim))

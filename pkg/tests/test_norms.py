"""Minkowski norms: evaluation, fundamental and Cartan tensors, families and reversibility."""

import itertools

import numpy as np
import pytest

from gosphere.models.norm.model import FamilyTag, MetricFamilySpec
from gosphere.utils.errors import InvalidInputError, NotStronglyConvexError, ValidationError
from gosphere.utils.sampling import sample_net


@pytest.fixture(scope="module")
def randers(norm_service):
    return norm_service.randers(np.eye(2), [0.5, 0.0])


@pytest.fixture(scope="module")
def alpha12_beta(norm_service):
    spec = MetricFamilySpec(family="alpha12_beta", dim=7, blocks=[1, 2, 4], f_expr="sqrt(s1^2+s2+s3)+0.1*s1")
    return norm_service.make_family(spec)


class TestEval:
    def test_euclidean(self, norm_service):
        assert norm_service.eval(norm_service.euclidean(2), [3.0, 4.0]) == pytest.approx(5.0, rel=1e-15)

    def test_randers(self, norm_service, randers):
        assert norm_service.eval(randers, [1.0, 0.0]) == pytest.approx(1.5, rel=1e-15)
        assert norm_service.eval(randers, [-1.0, 0.0]) == pytest.approx(0.5, rel=1e-15)

    def test_zero_vector(self, norm_service, randers):
        assert norm_service.eval(randers, [0.0, 0.0]) == 0.0

    def test_non_finite_rejected(self, norm_service, randers):
        with pytest.raises(InvalidInputError):
            norm_service.eval(randers, [np.nan, 1.0])

    def test_homogeneity_on_random_samples(self, norm_service, alpha12_beta, rng):
        points = rng.standard_normal((100, 7))
        assert np.allclose(alpha12_beta.values(2.0 * points), 2.0 * alpha12_beta.values(points), rtol=1e-12)
        assert norm_service.check_homogeneity(alpha12_beta, points) < 1e-10


class TestFundamentalTensor:
    def test_riemannian_is_its_matrix(self, norm_service, rng):
        a = rng.standard_normal((3, 3))
        matrix = a @ a.T + 3.0 * np.eye(3)
        norm = norm_service.riemannian(matrix)
        tensor = norm_service.fundamental_tensor(norm, rng.standard_normal(3))
        assert np.allclose(tensor.matrix, matrix, atol=1e-8)

    def test_randers_closed_form(self, norm_service, randers):
        # g = (F/alpha)(I - l l^T) + (l + b)(l + b)^T with l = y/|y|
        tensor = norm_service.fundamental_tensor(randers, [1.0, 0.0])
        assert np.allclose(tensor.matrix, [[2.25, 0.0], [0.0, 1.5]], atol=1e-8)

    def test_zero_homogeneous(self, norm_service, alpha12_beta, rng):
        y = rng.standard_normal(7)
        first = norm_service.fundamental_tensor(alpha12_beta, y).matrix
        second = norm_service.fundamental_tensor(alpha12_beta, 2.0 * y).matrix
        assert np.allclose(first, second, atol=1e-8)

    def test_reproduces_norm(self, norm_service, alpha12_beta):
        points = sample_net(7, 16, 3)
        tensors = norm_service.fundamental_tensors(alpha12_beta, points)
        quadratic = np.einsum("mi,mij,mj->m", points, tensors, points)
        assert np.allclose(quadratic, alpha12_beta.values(points) ** 2, rtol=1e-6)

    def test_zero_vector_rejected(self, norm_service, randers):
        with pytest.raises(InvalidInputError):
            norm_service.fundamental_tensor(randers, [0.0, 0.0])


class TestCartan:
    def test_riemannian_vanishes(self, norm_service, rng):
        norm = norm_service.riemannian(np.diag([1.0, 2.0, 3.0]))
        y, u, v, w = rng.standard_normal((4, 3))
        assert abs(norm_service.cartan(norm, y, u, v, w)) < 1e-5

    def test_flagpole_slot_vanishes(self, norm_service, alpha12_beta, rng):
        y, v, w = rng.standard_normal((3, 7))
        y /= np.linalg.norm(y)
        assert abs(norm_service.cartan(alpha12_beta, y, y, v / np.linalg.norm(v), w / np.linalg.norm(w))) < 1e-6

    def test_total_symmetry(self, norm_service, alpha12_beta, rng):
        y, u, v, w = rng.standard_normal((4, 7))
        y, u, v, w = (vector / np.linalg.norm(vector) for vector in (y, u, v, w))
        values = [norm_service.cartan(alpha12_beta, y, *order) for order in itertools.permutations((u, v, w))]
        assert max(values) - min(values) < 1e-6

    def test_randers_against_scalar_third_difference(self, norm_service, randers):
        y = np.array([1.0, 0.3])
        u = np.array([0.6, 0.8])

        def third(h):
            f = lambda t: randers.values((y + t * u)[None, :])[0] ** 2  # noqa: E731
            return (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h ** 3)

        coarse, fine = third(1e-2), third(5e-3)
        assert abs(coarse - fine) < 1e-3
        reference = fine + (fine - coarse) / 3.0
        assert norm_service.cartan(randers, y, u, u, u) == pytest.approx(0.25 * reference, abs=1e-4)


class TestFamilies:
    def test_degenerate_alpha12_beta_is_euclidean(self, norm_service, rng):
        spec = MetricFamilySpec(family="alpha12_beta", dim=7, blocks=[1, 2, 4], f_expr="sqrt(s1^2+s2+s3)")
        norm = norm_service.make_family(spec)
        points = rng.standard_normal((20, 7))
        assert np.allclose(norm.values(points), np.linalg.norm(points, axis=1), rtol=1e-14)

    def test_beta_term_matches_formula(self, alpha12_beta, rng):
        points = rng.standard_normal((20, 7))
        expected = np.linalg.norm(points, axis=1) + 0.1 * points[:, 0]
        assert np.allclose(alpha12_beta.values(points), expected, rtol=1e-14)

    def test_randers_spec(self, norm_service):
        spec = MetricFamilySpec(family="randers", dim=2, beta_covector=[0.5, 0.0])
        assert norm_service.eval(norm_service.make_family(spec), [1.0, 0.0]) == pytest.approx(1.5)

    def test_alpha_beta_family(self, norm_service):
        spec = MetricFamilySpec(family="alpha_beta", dim=3, f_expr="1+s1", beta_covector=[0.2, 0.0, 0.0])
        norm = norm_service.make_family(spec)
        assert norm_service.eval(norm, [0.0, 3.0, 4.0]) == pytest.approx(5.0)
        assert norm_service.eval(norm, [1.0, 0.0, 0.0]) == pytest.approx(1.2)

    def test_custom_family_in_y(self, norm_service):
        spec = MetricFamilySpec(family="custom", dim=2, f_expr="sqrt(y1^2+2*y2^2)")
        norm = norm_service.make_family(spec)
        assert norm_service.eval(norm, [1.0, 1.0]) == pytest.approx(np.sqrt(3.0))

    def test_strong_randers_rejected(self, norm_service):
        with pytest.raises(NotStronglyConvexError) as info:
            norm_service.randers(np.eye(2), [1.2, 0.0])
        assert info.value.witness.shape == (2,)

    def test_non_homogeneous_function_rejected(self, norm_service):
        spec = MetricFamilySpec(family="alpha12", dim=4, blocks=[2, 2], f_expr="s1+s2")
        with pytest.raises(ValidationError):
            norm_service.make_family(spec)

    @pytest.mark.parametrize("spec, message", [
        (MetricFamilySpec(family="alpha12", dim=4, blocks=[1, 2], f_expr="sqrt(s1+s2)"), "sum to dim"),
        (MetricFamilySpec(family="alpha12_beta", dim=4, blocks=[2, 1, 1], f_expr="sqrt(s2+s3)"), "one dimensional"),
        (MetricFamilySpec(family="alpha12", dim=4, blocks=[2, 2]), "f_expr is required"),
        (MetricFamilySpec(family="riemannian", dim=2, alpha_matrix=[[1.0, 0.5], [0.0, 1.0]]), "symmetric"),
    ])
    def test_invalid_specs(self, spec, message):
        assert any(message in error for error in spec.validate())

    def test_spec_dict_round_trip(self):
        spec = MetricFamilySpec(family="alpha12", dim=7, blocks=[3, 4], f_expr="sqrt(s1+2*s2)")
        assert MetricFamilySpec.from_dict(spec.to_dict()) == spec

    def test_family_tags(self):
        assert set(FamilyTag.values()) == {"riemannian", "randers", "alpha_beta", "alpha12", "alpha12_beta", "custom"}


class TestReversibility:
    def test_euclidean_is_reversible(self, norm_service):
        reversible, asymmetry = norm_service.check_reversible(norm_service.euclidean(3), 32)
        assert reversible and asymmetry == 0.0

    def test_randers_is_not(self, norm_service, randers):
        reversible, asymmetry = norm_service.check_reversible(randers, 32)
        assert not reversible and asymmetry > 0.1

    def test_alpha12_is_reversible(self, norm_service):
        spec = MetricFamilySpec(family="alpha12", dim=7, blocks=[3, 4], f_expr="sqrt(s1+2*s2+0.3*sqrt(s1^2+s2^2))")
        reversible, _ = norm_service.check_reversible(norm_service.make_family(spec), 32)
        assert reversible

    def test_sample_count_validated(self, norm_service, randers):
        with pytest.raises(ValidationError):
            norm_service.check_reversible(randers, 0)

    def test_max_cartan_separates_families(self, norm_service, randers):
        assert norm_service.max_cartan(norm_service.euclidean(2), 16) < 1e-5
        assert norm_service.max_cartan(randers, 16) > 1e-2

"""Zermelo navigation: root solves, the Randers closed form, composition and Killing transport."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gosphere.controllers.navigation.controller import field_from_text, great_circle
from gosphere.models.geometry.model import Curve
from gosphere.models.navigation.model import NavigationDatum
from gosphere.services.curvature.chart import randers_metric, round_metric
from gosphere.services.navigation.fields import VectorField
from gosphere.services.navigation.service import sphere_points, tangent_samples
from gosphere.utils.errors import (
    NavigationDomainError,
    NotKillingError,
    PreconditionError,
    UnknownIdentifierError,
    ValidationError,
)
from gosphere.utils.numdiff import time_derivatives
from gosphere.utils.sampling import make_rng


@pytest.fixture(scope="module")
def euclidean2(norm_service):
    return norm_service.euclidean(2)


class TestSingleFiber:
    def test_headwind_and_tailwind(self, navigation_service, euclidean2):
        datum = NavigationDatum(base=euclidean2, field=np.array([0.5, 0.0]))
        # |w - tW| = t: 1 - t/2 = t downwind, 1 + t/2 = t upwind
        assert navigation_service.navigate_eval(datum, None, [1.0, 0.0]) == pytest.approx(2.0 / 3.0, rel=1e-12)
        assert navigation_service.navigate_eval(datum, None, [-1.0, 0.0]) == pytest.approx(2.0, rel=1e-12)
        assert navigation_service.navigate_eval(datum, None, [0.0, 0.0]) == 0.0

    def test_batch_matches_scalar(self, navigation_service, euclidean2, rng):
        datum = NavigationDatum(base=euclidean2, field=np.array([0.3, -0.4]), epsilon=0.9)
        vectors = rng.standard_normal((12, 2))
        batch = navigation_service.navigate_values(datum, None, vectors)
        scalar = [navigation_service.navigate_eval(datum, None, w) for w in vectors]
        assert np.allclose(batch, scalar, rtol=1e-10)

    def test_strong_wind_rejected(self, navigation_service, euclidean2):
        with pytest.raises(NavigationDomainError):
            navigation_service.navigated_norm(euclidean2, [1.2, 0.0])
        datum = NavigationDatum(base=euclidean2, field=np.array([1.0, 0.0]))
        with pytest.raises(NavigationDomainError):
            navigation_service.validate_datum(datum)

    def test_zero_wind_is_identity(self, navigation_service, norm_service, rng):
        norm = norm_service.randers(np.eye(3), [0.2, 0.1, 0.0])
        navigated = navigation_service.navigated_norm(norm, np.zeros(3))
        points = rng.standard_normal((10, 3))
        assert np.allclose(navigated.values(points), norm.values(points), rtol=1e-12)

    def test_composition_adds_winds(self, navigation_service, euclidean2, rng):
        datum = NavigationDatum(base=euclidean2, field=np.array([0.2, 0.1]), epsilon=1.0)
        composed = navigation_service.compose(datum, [0.1, -0.3])
        first = navigation_service.navigated_norm(euclidean2, [0.2, 0.1])
        stepwise = navigation_service.navigated_norm(first, [0.1, -0.3])
        vectors = rng.standard_normal((10, 2))
        assert np.allclose(navigation_service.navigate_values(composed, None, vectors), stepwise.values(vectors),
                           rtol=1e-9)

    def test_round_trip(self, navigation_service, norm_service):
        norm = norm_service.randers(np.diag([1.0, 2.0, 0.5]), [0.1, 0.0, -0.2])
        assert navigation_service.round_trip_check(norm, [0.2, -0.1, 0.3], 64).passed


class TestRandersCorrespondence:
    def test_closed_form_values(self, navigation_service):
        data = navigation_service.randers_from_navigation(np.eye(2), [0.5, 0.0])
        assert data.lam == pytest.approx(0.25)
        assert data.values(np.array([[1.0, 0.0], [-1.0, 0.0]])) == pytest.approx([2.0 / 3.0, 2.0])
        assert data.beta_alpha_norm < 1.0

    @settings(max_examples=25, deadline=None)
    @given(wind=st.tuples(*[st.floats(min_value=-0.5, max_value=0.5)] * 3),
           diagonal=st.tuples(*[st.floats(min_value=0.5, max_value=2.0)] * 3))
    def test_matches_implicit_navigation(self, navigation_service, wind, diagonal):
        h = np.diag(diagonal)
        wind = np.asarray(wind)
        if wind @ h @ wind >= 0.9:
            return
        check = navigation_service.randers_check(navigation_service.randers_from_navigation(h, wind), 64, seed=1)
        assert check.passed, check.to_dict()

    def test_lambda_bound(self, navigation_service):
        with pytest.raises(NavigationDomainError):
            navigation_service.randers_from_navigation(np.eye(2), [0.8, 0.6])

    def test_h_must_be_positive_definite(self, navigation_service):
        with pytest.raises(ValidationError):
            navigation_service.randers_from_navigation(np.diag([1.0, -1.0]), [0.1, 0.0])

    def test_sphere_closed_form_matches_root_solve(self, navigation_service):
        field = VectorField.rotation(2)
        datum = NavigationDatum(base=round_metric(2), field=field, epsilon=0.3)
        points = sphere_points(2, 40, 2)
        vectors = tangent_samples(points, make_rng(2))
        implicit = navigation_service.navigate_values(datum, points, vectors)
        closed = randers_metric(2, field, 0.3).values(points, vectors)
        assert np.max(np.abs(closed - implicit) / implicit) < 1e-9


class TestFields:
    def test_named_fields(self):
        assert field_from_text("hopf", 3).is_rotation
        assert field_from_text("rotation", 2, 0.5).omega[1, 0] == 0.5
        with pytest.raises(ValidationError):
            field_from_text("hopf", 2)

    def test_expression_field(self):
        field = field_from_text("-x2; x1; 0", 2)
        points = sphere_points(2, 8, 0)
        assert np.allclose(field.values(points), VectorField.rotation(2).values(points), atol=1e-15)
        with pytest.raises(UnknownIdentifierError):
            field_from_text("x4; 0; 0", 2)
        with pytest.raises(ValidationError):
            field_from_text("x1; x2", 2)

    def test_integrated_flow_matches_rotation(self):
        points = sphere_points(2, 6, 1)
        expression = VectorField.from_expressions(2, ["-x2", "x1", "0"])
        assert np.allclose(expression.flow(points, 0.8), VectorField.rotation(2).flow(points, 0.8), atol=1e-9)

    def test_linear_sums_stay_linear(self):
        total = VectorField.rotation(3, 0, 1) + VectorField.rotation(3, 2, 3)
        assert total.kind == "linear"
        assert np.allclose(total.omega, VectorField.hopf().omega)

    def test_hopf_has_constant_length(self):
        points = sphere_points(3, 30, 4)
        lengths = np.linalg.norm(VectorField.hopf(0.4).values(points), axis=1)
        assert np.allclose(lengths, 0.4)


class TestKilling:
    def test_rotations_are_killing(self, navigation_service):
        field = VectorField.rotation(2)
        assert navigation_service.killing_defect(round_metric(2), field) < 1e-12
        assert navigation_service.killing_defect(randers_metric(2, field, 0.3), field) < 1e-10

    def test_gradient_field_is_not_killing(self, navigation_service):
        field = VectorField.from_expressions(2, ["0", "0", "1"], label="up")
        assert navigation_service.killing_defect(round_metric(2), field, sample_count=8) > 1e-2
        with pytest.raises(NotKillingError):
            navigation_service.check_killing(round_metric(2), field, sample_count=8)

    def test_transported_great_circle_has_unit_randers_speed(self, navigation_service):
        field = VectorField.hopf()
        point = np.array([1.0, 0.0, 0.0, 0.0])
        circle = great_circle(point, np.array([0.0, 0.0, 1.0, 0.0]))
        transported = navigation_service.killing_transport(round_metric(3), circle, field, 0.3)
        times = transported.grid(11)[1:-1]
        velocity, _ = time_derivatives(transported.points, times)
        speeds = randers_metric(3, field, 0.3).values(transported.points(times), velocity)
        assert np.allclose(speeds, 1.0, atol=1e-8)
        assert np.allclose(np.linalg.norm(transported.points(times), axis=1), 1.0)

    def test_transport_needs_unit_speed(self, navigation_service):
        point = np.array([1.0, 0.0, 0.0])
        slow = Curve(0.0, 1.0, lambda t: np.stack([np.cos(0.5 * t), np.sin(0.5 * t), 0.0 * t], axis=1))
        with pytest.raises(PreconditionError):
            navigation_service.killing_transport(round_metric(2), slow, VectorField.rotation(2), 0.3)
        assert great_circle(point, np.array([0.0, 2.0, 0.0])).points([np.pi / 2])[0] == pytest.approx([0, 1, 0])

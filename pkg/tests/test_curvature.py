"""Charts, sprays, flag curvature, geodesics, closed-geodesic lengths and distances on spheres."""

import csv
import math

import numpy as np
import pytest

from gosphere.controllers.navigation.controller import great_circle
from gosphere.models.geometry.model import Chart
from gosphere.services.curvature.chart import (
    ChartMetric,
    navigated_metric,
    randers_metric,
    round_metric,
    to_ambient,
    to_chart,
    transition,
)
from gosphere.services.navigation.fields import VectorField
from gosphere.utils.errors import (
    InvalidFlagError,
    InvalidInputError,
    NotKillingError,
    PreconditionError,
    SwitchChartSignal,
    ValidationError,
)

DELTA = 0.3


@pytest.fixture(scope="module")
def round2(curvature_service):
    return curvature_service.chart_metric(round_metric(2))


@pytest.fixture(scope="module")
def randers2(curvature_service):
    return curvature_service.chart_metric(randers_metric(2, VectorField.rotation(2), DELTA))


class TestCharts:
    def test_chart_round_trip(self, rng):
        points = rng.standard_normal((10, 3))
        points /= np.linalg.norm(points, axis=1, keepdims=True)
        charts, x = to_chart(points)
        assert np.allclose(to_ambient(charts, x), points, atol=1e-12)
        assert np.all(np.linalg.norm(x, axis=1) <= 1.0 + 1e-12)

    def test_transition_is_an_inversion(self):
        x, y = transition(np.array([[0.5, 0.0]]), np.array([[1.0, 0.0]]))
        assert np.allclose(x, [[2.0, 0.0]])
        assert np.allclose(y, [[-4.0, 0.0]])

    def test_charts_agree_on_the_randers_sphere(self, randers2):
        assert randers2.check_transition() < 1e-12

    def test_round_metric_is_conformal(self, round2):
        x = np.array([[0.3, -0.2]])
        y = np.array([[1.0, 0.5]])
        expected = 2.0 * np.linalg.norm(y) / (1.0 + 0.13)
        assert round2.values(Chart.NORTH, x, y)[0] == pytest.approx(expected, rel=1e-12)

    def test_expression_metric(self):
        metric = ChartMetric.expression(2, "sqrt(y1^2+y2^2)*exp(x1)")
        assert metric.values(Chart.FLAT, [[1.0, 0.0]], [[3.0, 4.0]])[0] == pytest.approx(5.0 * math.e)

    def test_fiber_norm(self, curvature_service):
        fiber = curvature_service.fiber_norm(randers_metric(2, VectorField.rotation(2), DELTA), [0.0, 0.0, 1.0])
        assert fiber.dim == 2
        assert fiber.values(np.array([[1.0, 0.0]]))[0] == pytest.approx(1.0)


class TestSpray:
    def test_round_sphere_matches_conformal_formula(self, curvature_service, round2):
        x = np.array([0.3, -0.2])
        y = np.array([1.0, 0.5])
        # metric e^{2 phi}|y|^2 with phi = log 2 - log(1 + r^2)
        grad_phi = -2.0 * x / (1.0 + x @ x)
        expected = (y @ grad_phi) * y - 0.5 * (y @ y) * grad_phi
        assert np.allclose(curvature_service.spray_coefficients(round2, x, y), expected, atol=1e-7)

    def test_flat_spray_vanishes(self, curvature_service):
        spray = curvature_service.spray_coefficients(ChartMetric.flat(3), [0.1, 2.0, -1.0], [1.0, 0.0, 2.0],
                                                     Chart.FLAT)
        assert np.allclose(spray, 0.0, atol=1e-9)

    def test_spray_is_two_homogeneous(self, curvature_service, randers2):
        x = np.array([0.2, 0.4])
        y = np.array([0.7, -0.3])
        first = curvature_service.spray_coefficients(randers2, x, y)
        second = curvature_service.spray_coefficients(randers2, x, 2.0 * y)
        assert np.allclose(second, 4.0 * first, rtol=1e-6, atol=1e-9)

    def test_outside_the_chart_interior(self, curvature_service, round2):
        with pytest.raises(SwitchChartSignal):
            curvature_service.spray_coefficients(round2, [5.0, 0.0], [1.0, 0.0])

    def test_zero_flagpole(self, curvature_service, round2):
        with pytest.raises(InvalidInputError):
            curvature_service.spray_coefficients(round2, [0.1, 0.0], [0.0, 0.0])


class TestFlagCurvature:
    def test_round_sphere_has_unit_curvature(self, curvature_service, round2):
        net = curvature_service.curvature_net(round2, 6)
        assert net.passed, net.to_dict()

    def test_flat_metric_has_zero_curvature(self, curvature_service):
        flat = ChartMetric.flat(2)
        flag = curvature_service.make_flag(flat, [0.3, 0.1], [1.0, 0.0], [0.2, 1.0], Chart.FLAT)
        assert abs(curvature_service.flag_curvature(flat, flag)) < 1e-6

    def test_parallel_edge_rejected(self, curvature_service, round2):
        with pytest.raises(InvalidFlagError):
            curvature_service.make_flag(round2, [0.1, 0.1], [1.0, 2.0], [2.0, 4.0])

    @pytest.mark.slow
    def test_killing_image_keeps_unit_curvature(self, curvature_service, randers2):
        assert curvature_service.curvature_net(randers2, 6).passed

    @pytest.mark.slow
    def test_navigation_preserves_flag_curvature(self, curvature_service):
        net = curvature_service.curvature_preservation(round_metric(2), VectorField.rotation(2), DELTA, count=6)
        assert net.passed, net.to_dict()

    def test_preservation_needs_killing_field(self, curvature_service):
        field = VectorField.from_expressions(2, ["0", "0", "1"])
        with pytest.raises(NotKillingError):
            curvature_service.curvature_preservation(round_metric(2), field, DELTA, count=2)


class TestGeodesics:
    @pytest.mark.slow
    def test_great_circle_closes_after_two_pi(self, curvature_service, round2):
        path = curvature_service.geodesic(round2, [0.0, 0.0], [0.5, 0.0], 2.0 * math.pi)
        assert path.switches >= 1
        assert np.allclose(path.points([2.0 * math.pi])[0], [0.0, 0.0, 1.0], atol=1e-6)
        assert np.allclose(path.points([math.pi])[0], [0.0, 0.0, -1.0], atol=1e-6)
        assert path.speed_drift < 1e-7

    def test_needs_unit_initial_vector(self, curvature_service, round2):
        with pytest.raises(PreconditionError):
            curvature_service.geodesic(round2, [0.0, 0.0], [1.0, 0.0], 1.0)

    def test_great_circle_residual(self, curvature_service, round2):
        circle = great_circle(np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.6, 0.8]))
        residual, drift = curvature_service.geodesic_residual(round2, circle)
        assert residual < 1e-5 and drift < 1e-7

    def test_curve_export(self, curvature_service, tmp_path):
        circle = great_circle(np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
        path = tmp_path / "circle.csv"
        assert curvature_service.export_curve_csv(circle, str(path), count=11) == 11
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["t", "chart", "x1", "x2"]
        assert len(rows) == 12
        assert rows[1][1] in ("N", "S")


class TestClosedGeodesics:
    def test_round_hopf_fibers_have_length_two_pi(self, curvature_service):
        record = curvature_service.closed_geodesic_length(round_metric(3), VectorField.hopf())
        assert record.length == pytest.approx(2.0 * math.pi, abs=1e-6)
        assert record.period == pytest.approx(2.0 * math.pi, abs=1e-6)
        assert not record.validate()

    def test_navigated_lengths(self, curvature_service):
        metric = randers_metric(3, VectorField.hopf(), DELTA)
        plus, minus, harmonic = curvature_service.harmonic_length_check(metric, VectorField.hopf())
        assert plus == pytest.approx(2.0 * math.pi / (1.0 + DELTA), abs=1e-6)
        assert minus == pytest.approx(2.0 * math.pi / (1.0 - DELTA), abs=1e-6)
        assert abs(harmonic) < 1e-7

    def test_tuning_recovers_the_planted_scale(self, curvature_service):
        field = VectorField.hopf()
        tuning = curvature_service.tune_epsilon(randers_metric(3, field, -DELTA), field)
        assert tuning.epsilon == pytest.approx(DELTA, abs=1e-6)
        assert tuning.check_length == pytest.approx(2.0 * math.pi, abs=1e-6)
        assert tuning.monotone

    def test_target_below_round_length(self, curvature_service):
        with pytest.raises(PreconditionError):
            curvature_service.tune_epsilon(round_metric(3), VectorField.hopf(), target=3.0)

    def test_field_of_varying_length(self, curvature_service):
        with pytest.raises(PreconditionError):
            curvature_service.closed_geodesic_length(round_metric(2), VectorField.rotation(2))

    def test_direction_checked(self, curvature_service):
        with pytest.raises(ValidationError):
            curvature_service.closed_geodesic_length(round_metric(3), VectorField.hopf(), "up")


class TestDistances:
    @pytest.mark.slow
    def test_round_distances(self, curvature_service, round2):
        north, east = np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0])
        assert curvature_service.distance(round2, north, east, 72) == pytest.approx(math.pi / 2, abs=1e-5)
        assert curvature_service.distance(round2, north, -north, 72) == pytest.approx(math.pi, abs=1e-5)

    @pytest.mark.slow
    def test_randers_distance_is_asymmetric(self, curvature_service, randers2):
        first, second = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
        forward = curvature_service.distance(randers2, first, second, 72)
        backward = curvature_service.distance(randers2, second, first, 72)
        assert abs(forward - backward) > 1e-2

    @pytest.mark.slow
    def test_round_distance_is_symmetric(self, curvature_service, round2):
        pairs = curvature_service.symmetry_pairs(2, count=1, seed=3)[1:]
        assert curvature_service.distance_symmetry_check(round2, pairs, directions=72) < 2e-3

    def test_same_point_rejected(self, curvature_service, round2):
        with pytest.raises(InvalidInputError):
            curvature_service.distance(round2, [0.0, 0.0, 1.0], [0.0, 0.0, 1.0])

    def test_needs_a_sphere_metric(self, curvature_service):
        with pytest.raises(ValidationError):
            curvature_service.distance(ChartMetric.flat(2), [0.0, 1.0], [1.0, 0.0])

    def test_symmetry_pairs(self, curvature_service):
        pairs = curvature_service.symmetry_pairs(2, count=2, seed=4)
        assert len(pairs) == 4
        assert np.allclose(pairs[0][0], -pairs[0][1])


class TestAntipodalMap:
    @pytest.mark.slow
    def test_round_sphere(self, curvature_service, round2):
        records = curvature_service.antipodal_check(round2, sample_count=2, directions=4, check_curvature=False)
        for record in records:
            assert np.allclose(record.psi, -np.asarray(record.x), atol=1e-5)
            assert record.psi_squared_error < 1e-5

    @pytest.mark.slow
    def test_tuned_metric_is_an_involution(self, curvature_service):
        field = VectorField.hopf()
        base = randers_metric(3, field, -DELTA)
        tuning = curvature_service.tune_epsilon(base, field)
        tuned = curvature_service.chart_metric(navigated_metric(base, field, tuning.epsilon))
        records = curvature_service.antipodal_check(tuned, sample_count=2, directions=4, check_curvature=False)
        assert max(record.psi_squared_error for record in records) < 1e-3


class TestDiagnostics:
    def test_critical_point_of_field_length(self, curvature_service, randers2):
        check = curvature_service.killing_critical_check(randers2, VectorField.rotation(2), [1.0, 0.0, 0.0])
        assert check.gradient_norm < 1e-6
        assert check.ode_residual < 1e-4

    def test_field_must_not_vanish(self, curvature_service, randers2):
        with pytest.raises(PreconditionError):
            curvature_service.killing_critical_check(randers2, VectorField.rotation(2), [0.0, 0.0, 1.0])

    @pytest.mark.slow
    def test_reversible_unit_curvature_means_riemannian(self, curvature_service):
        field = VectorField.rotation(2)
        records = curvature_service.kim_min_consistency(
            {"round": round_metric(2), "randers": randers_metric(2, field, DELTA)}, sample_count=8)
        by_name = {record.name: record for record in records}
        assert by_name["round"].reversible and by_name["round"].curvature_one
        assert by_name["round"].cartan < 1e-5
        assert not by_name["randers"].reversible
        assert all(record.holds for record in records)

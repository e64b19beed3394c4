import numpy as np
import pytest

from patrec import binary_region as br
from patrec.envelope import (
    ScalarField2D,
    check_simplification,
    golden_maximize,
    product_field,
    ray_envelope,
    ray_envelope_theta,
    two_point_envelope,
)
from patrec.surface import GridSpec

LINEAR = ScalarField2D(lambda x, y: 0.3 * x + 0.5 * y, 1.0, 1.0, name="linear")
CONCAVE = ScalarField2D(lambda x, y: np.sqrt(x * y), 1.0, 1.0, name="sqrt")


def test_field_validates_domain():
    with pytest.raises(ValueError):
        ScalarField2D(lambda x, y: x, 0.0, 1.0)
    with pytest.raises(TypeError):
        ScalarField2D(1.0)


def test_golden_maximize_batched():
    x, fx = golden_maximize(lambda t: -((t - np.array([0.2, 0.7])) ** 2), np.zeros(2), np.ones(2), xtol=1e-12)
    np.testing.assert_allclose(x, [0.2, 0.7], atol=1e-9)
    np.testing.assert_allclose(fx, 0.0, atol=1e-15)


class TestRay:
    def test_origin(self):
        assert ray_envelope(product_field(), np.array([0.0, 0.0])) == 0.0

    def test_concave_field_is_fixed(self):
        pts = np.array([[1.0, 1.0], [0.5, 0.25], [0.9, 0.1]])
        np.testing.assert_allclose(ray_envelope(CONCAVE, pts), CONCAVE(pts[:, 0], pts[:, 1]), atol=1e-12)

    def test_outside_domain(self):
        with pytest.raises(ValueError):
            ray_envelope(product_field(), np.array([1.2, 0.5]))

    def test_theta_on_corner_is_one(self):
        theta, value = ray_envelope_theta(product_field(), np.array([[1.0, 1.0]]))
        assert theta[0] == pytest.approx(1.0)
        assert value[0] == pytest.approx(1.0)

    def test_product_closed_form(self):
        # theta f(x/theta, y/theta) for the product field; maximize on a fine grid
        pts = np.array([[0.2, 0.3], [0.05, 0.6]])
        got = ray_envelope(product_field(), pts)
        f = product_field()
        for (x, y), v in zip(pts, got):
            th = np.linspace(max(x, y), 1.0, 200001)
            assert v == pytest.approx(np.max(th * f(x / th, y / th)), abs=1e-9)


class TestTwoPoint:
    def test_linear_fixed(self):
        pts = np.array([[0.3, 0.4], [0.9, 0.1]])
        np.testing.assert_allclose(two_point_envelope(LINEAR, pts), LINEAR(pts[:, 0], pts[:, 1]), atol=1e-9)

    def test_corner(self):
        f = product_field()
        assert two_point_envelope(f, np.array([[1.0, 1.0]]))[0] == pytest.approx(1.0, abs=1e-12)

    def test_binary_interior_agrees_with_ray(self):
        field = br.BinaryEnv(0.2).field()
        pts = np.array([[0.2, 0.3], [0.6, 0.1], [0.45, 0.45]])
        np.testing.assert_allclose(two_point_envelope(field, pts), ray_envelope(field, pts), atol=1e-6)

    def test_dominates_field(self):
        field = br.BinaryEnv(0.2).field()
        rng = np.random.default_rng(4)
        pts = rng.uniform(0, 1, (20, 2))
        assert np.all(two_point_envelope(field, pts) >= field(pts[:, 0], pts[:, 1]) - 1e-12)

    def test_grid_n_floor(self):
        with pytest.raises(ValueError):
            two_point_envelope(LINEAR, np.array([[0.5, 0.5]]), grid_n=4)


class TestCheck:
    def test_product_passes(self):
        rep = check_simplification(product_field(), GridSpec(9, 9))
        assert rep.passed
        assert rep.max_gap <= 1e-6
        assert rep.cells == 81
        assert rep.zero_axis_failed == []

    def test_non_monotone_negative_control(self):
        bumpy = ScalarField2D(
            lambda x, y: 0.5 + 0.4 * np.sin(7 * x) * np.cos(5 * y), 1.0, 1.0, name="bumpy"
        )
        rep = check_simplification(bumpy, GridSpec(9, 9))
        # the ray form only sees one direction; a general surface breaks it
        assert not rep.passed
        assert rep.precondition_samples_failed
        assert rep.zero_axis_failed

    def test_report_json(self):
        rep = check_simplification(product_field(), GridSpec(3, 3))
        assert '"field_name": "product"' in rep.to_json()

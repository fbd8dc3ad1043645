"""Arch curve fitting, nearest-point projection, anatomical directions."""

import numpy as np
import pytest

from archmark.arch import (ArchCurve, direction_at, fit_quadratic,
                           order_by_arch, project_onto)
from archmark.errors import ArchFitError

from oracles import project_reference


class TestFit:
    def test_exact_parabola_recovered(self):
        a, b, c = -0.06, 0.4, 21.0
        x = np.linspace(-25, 25, 11)
        pts = np.stack([x, a * x * x + b * x + c], axis=1)
        curve = fit_quadratic(pts)
        assert curve.a == pytest.approx(a, abs=1e-9)
        assert curve.b == pytest.approx(b, abs=1e-9)
        assert curve.c == pytest.approx(c, abs=1e-9)

    def test_weights_downweight_outliers(self):
        a, b, c = -0.06, 0.0, 20.0
        x = np.linspace(-25, 25, 13)
        pts = np.stack([x, a * x * x + b * x + c], axis=1)
        spoiled = pts.copy()
        spoiled[6, 1] += 40.0
        weights = np.ones(13)
        weights[6] = 1e-9
        curve = fit_quadratic(spoiled, weights=weights)
        assert curve.a == pytest.approx(a, abs=1e-6)
        assert curve.c == pytest.approx(c, abs=1e-5)

    def test_too_few_points(self):
        with pytest.raises(ArchFitError):
            fit_quadratic(np.array([[0.0, 1.0], [1.0, 2.0]]))

    def test_degenerate_abscissae(self):
        pts = np.array([[2.0, 0.0], [2.0, 1.0], [2.0, 2.0], [2.0, 3.0]])
        with pytest.raises(ArchFitError):
            fit_quadratic(pts)


class TestProjection:
    def test_matches_dense_sampling(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            curve = ArchCurve(a=float(rng.uniform(-0.09, -0.03)),
                              b=float(rng.uniform(-0.5, 0.5)),
                              c=float(rng.uniform(10, 25)))
            pt = rng.uniform([-35, -15], [35, 30])
            s = float(project_onto(curve, pt))
            s_ref = project_reference(curve, pt)
            d = (s - pt[0]) ** 2 + (curve.y(s) - pt[1]) ** 2
            d_ref = (s_ref - pt[0]) ** 2 + (curve.y(s_ref) - pt[1]) ** 2
            assert d <= d_ref + 1e-9
            assert abs(s - s_ref) < 1e-4

    def test_point_on_curve_projects_to_itself(self):
        curve = ArchCurve(a=-0.05, b=0.2, c=18.0)
        for x in (-20.0, -3.0, 0.0, 12.0):
            s = float(project_onto(curve, np.array([x, curve.y(x)])))
            assert s == pytest.approx(x, abs=1e-6)

    def test_symmetric_point_picks_a_true_minimum(self):
        # Directly above the apex of y = x**2 the two nearest points are
        # mirror images; either is a valid projection and repeated calls
        # must agree.
        curve = ArchCurve(a=1.0, b=0.0, c=0.0)
        s = float(project_onto(curve, np.array([0.0, 4.0])))
        assert abs(s) == pytest.approx(np.sqrt(3.5), abs=1e-9)
        again = float(project_onto(curve, np.array([0.0, 4.0])))
        assert s == again

    def test_linear_curve(self):
        curve = ArchCurve(a=0.0, b=1.0, c=0.0)    # the line y = x
        s = float(project_onto(curve, np.array([2.0, 0.0])))
        assert s == pytest.approx(1.0, abs=1e-12)

    def test_batched_shape(self):
        curve = ArchCurve(a=-0.06, b=0.0, c=20.0)
        pts = np.array([[0.0, 22.0], [10.0, 10.0], [-10.0, 10.0]])
        s = project_onto(curve, pts)
        assert s.shape == (3,)

    def test_order_by_arch_is_stable(self):
        curve = ArchCurve(a=-0.06, b=0.0, c=20.0)
        pts = np.array([[5.0, 18.0], [-5.0, 18.0], [5.0, 19.0],
                        [0.0, 21.0]])
        order = order_by_arch(curve, pts)
        s = np.atleast_1d(project_onto(curve, pts))
        assert np.array_equal(s[order], np.sort(s, kind="stable"))
        # Equal-s points keep their input order.
        flat = ArchCurve(a=0.0, b=0.0, c=0.0)
        dup = np.array([[1.0, 5.0], [1.0, -5.0], [0.0, 1.0]])
        assert list(order_by_arch(flat, dup)) == [2, 0, 1]


class TestDirections:
    def test_apex_of_symmetric_arch(self):
        curve = ArchCurve(a=-0.06, b=0.0, c=20.0)
        apex = np.array([0.0, 20.0])
        assert np.allclose(direction_at(curve, apex, "distal"), [-1, 0])
        assert np.allclose(direction_at(curve, apex, "mesial"), [1, 0])
        assert np.allclose(direction_at(curve, apex, "buccal"), [0, 1])
        assert np.allclose(direction_at(curve, apex, "lingual"), [0, -1])

    def test_right_limb_points_away_from_midline(self):
        curve = ArchCurve(a=-0.06, b=0.0, c=20.0)
        pt = np.array([-15.0, curve.y(-15.0)])
        distal = direction_at(curve, pt, "distal")
        m = curve.slope(-15.0)
        assert m > 0
        assert np.allclose(distal, -np.array([1.0, m]) / np.hypot(1, m))
        buccal = direction_at(curve, pt, "buccal")
        assert np.allclose(buccal, np.array([-m, 1.0]) / np.hypot(1, m))

    def test_unknown_kind_rejected(self):
        curve = ArchCurve(a=-0.06, b=0.0, c=20.0)
        with pytest.raises(ValueError):
            direction_at(curve, np.array([0.0, 20.0]), "sideways")

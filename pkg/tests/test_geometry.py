import json
import math

import numpy as np
import pytest
from scipy.special import ellipe

from sympb import (
    DomainValidationError,
    EllipseSupport,
    FourierSupport,
    TangentFrame,
    area,
    boundary_derivatives,
    boundary_point,
    boundary_tangent,
    conjugate_param,
    curvature_radius,
    domain_from_spec,
    domain_to_spec,
    fourier_projection,
    load_domain,
    omega,
    perimeter,
    sample_fourier_domain,
    support_eval,
    validate_support,
)

TWO_PI = 2 * math.pi


def ellipse_perimeter_oracle(a, b):
    # complete elliptic integral of the second kind, m = 1 - (b/a)^2
    return 4 * a * ellipe(1 - (b / a) ** 2)


class TestSupportEval:
    def test_circle_constant(self, circle):
        assert support_eval(circle, 0.7, 0) == 1.0
        assert support_eval(circle, 0.7, 2) == 0.0

    def test_cos2_mode(self):
        p = FourierSupport(1.0, [0.0, 0.1])
        assert support_eval(p, 0.0, 0) == pytest.approx(1.1, abs=1e-15)
        assert support_eval(p, 0.0, 2) == pytest.approx(-0.4, abs=1e-15)

    def test_ellipse_axes(self, ellipse):
        assert support_eval(ellipse, 0.0, 0) == pytest.approx(2.0, abs=1e-15)
        assert support_eval(ellipse, math.pi / 2, 0) == pytest.approx(1.0, abs=1e-14)
        # closed form sqrt(A^2 cos^2 + B^2 sin^2) at a generic angle
        t = 0.83
        assert support_eval(ellipse, t, 0) == pytest.approx(
            math.sqrt(4 * math.cos(t) ** 2 + math.sin(t) ** 2), abs=1e-14
        )

    def test_invalid_order(self, circle):
        with pytest.raises(ValueError):
            support_eval(circle, 0.0, 4)

    def test_fourier_derivative_matches_fd(self, random_domains):
        p = random_domains[0]
        h = 1e-5
        for a in (0.3, 2.1, 5.5):
            for order in (1, 2, 3):
                fd = (p.eval(a + h, order - 1) - p.eval(a - h, order - 1)) / (2 * h)
                assert p.eval(a, order) == pytest.approx(fd, abs=1e-8)

    def test_scalar_and_array_paths_agree(self, ellipse, random_domains):
        grid = np.linspace(0, TWO_PI, 17)
        for p in (ellipse, random_domains[1]):
            for order in range(4):
                arr = p.eval(grid, order)
                scl = np.array([p.eval(float(a), order) for a in grid])
                assert np.abs(arr - scl).max() < 1e-14


class TestBoundary:
    def test_circle_points(self, circle):
        assert boundary_point(circle, 0.0) == pytest.approx([1.0, 0.0], abs=1e-15)
        assert boundary_point(circle, math.pi / 2) == pytest.approx([0.0, 1.0], abs=1e-15)

    def test_ellipse_rightmost(self, ellipse):
        assert boundary_point(ellipse, 0.0) == pytest.approx([2.0, 0.0], abs=1e-14)

    def test_convex_side_condition(self, ellipse, random_domains):
        # omega(gamma'(a), gamma(s) - gamma(a)) >= 0 for every s
        grid = np.linspace(0, TWO_PI, 400, endpoint=False)
        for p in (ellipse, random_domains[2]):
            pts = boundary_point(p, grid)
            for a in (0.0, 1.1, 3.9):
                t = boundary_tangent(p, a)
                vals = omega(t, pts - boundary_point(p, a))
                assert vals.min() > -1e-12

    def test_circle_derivatives(self, circle):
        g1, g2 = boundary_derivatives(circle, 0.0)
        assert g1 == pytest.approx([0.0, 1.0], abs=1e-15)
        assert g2 == pytest.approx([-1.0, 0.0], abs=1e-15)

    def test_ellipse_speed(self, ellipse):
        # |gamma'| = p'' + p = (AB)^2 / p^3; equals 0.5 at the right vertex
        g1, _ = boundary_derivatives(ellipse, 0.0)
        assert np.linalg.norm(g1) == pytest.approx(0.5, abs=1e-13)

    def test_derivatives_match_fd(self, random_domains):
        p = random_domains[3]
        h = 1e-4
        for a in (0.7, 2.9):
            g1, g2 = boundary_derivatives(p, a)
            fd1 = (boundary_point(p, a + h) - boundary_point(p, a - h)) / (2 * h)
            fd2 = (boundary_point(p, a + h) - 2 * boundary_point(p, a)
                   + boundary_point(p, a - h)) / (h * h)
            assert np.abs(g1 - fd1).max() < 1e-6
            assert np.abs(g2 - fd2).max() < 1e-5

    def test_fd_error_is_second_order(self, ellipse):
        a = 1.3
        g1, _ = boundary_derivatives(ellipse, a)

        def err(h):
            fd = (boundary_point(ellipse, a + h) - boundary_point(ellipse, a - h)) / (2 * h)
            return np.abs(fd - g1).max()

        ratio = err(2e-4) / err(1e-4)
        assert 3.5 < ratio < 4.5


class TestIntegrals:
    def test_circle(self, circle):
        assert perimeter(circle) == pytest.approx(TWO_PI, abs=1e-12)
        assert area(circle) == pytest.approx(math.pi, abs=1e-12)

    def test_ellipse(self, ellipse):
        assert area(ellipse) == pytest.approx(2 * math.pi, abs=1e-10)
        assert perimeter(ellipse) == pytest.approx(
            ellipse_perimeter_oracle(2.0, 1.0), abs=1e-10
        )

    def test_nonconstant_modes_drop_out(self):
        p = FourierSupport(1.0, [0.0, 0.0, 0.1])
        assert perimeter(p) == pytest.approx(TWO_PI, abs=1e-12)

    def test_curvature_radius(self, circle, ellipse):
        assert curvature_radius(circle, 1.234) == pytest.approx(1.0, abs=1e-15)
        assert curvature_radius(ellipse, math.pi / 2) == pytest.approx(4.0, abs=1e-12)
        p = FourierSupport(1.0, [0.0, 0.2])
        assert curvature_radius(p, 0.0) == pytest.approx(0.4, abs=1e-14)

    def test_scale_covariance(self, random_domains):
        p = random_domains[4]
        lam = 1.7
        scaled = FourierSupport(lam * p.a0, lam * p.cos, lam * p.sin)
        assert perimeter(scaled) == pytest.approx(lam * perimeter(p), rel=1e-13)
        assert area(scaled) == pytest.approx(lam * lam * area(p), rel=1e-13)


class TestConjugateParam:
    def test_basic(self):
        assert conjugate_param(0.0) == pytest.approx(math.pi)
        assert conjugate_param(math.pi / 3) == pytest.approx(4 * math.pi / 3)

    def test_tangents_parallel(self, ellipse):
        rng = np.random.default_rng(5)
        for a in rng.uniform(0, TWO_PI, 20):
            t1 = boundary_tangent(ellipse, a)
            t2 = boundary_tangent(ellipse, conjugate_param(a))
            assert abs(omega(t1, t2)) < 1e-12


class TestValidation:
    def test_circle_ok(self, circle):
        report = validate_support(circle)
        assert report.ok
        assert report.min_support == pytest.approx(1.0)
        assert report.min_curvature == pytest.approx(1.0)

    def test_flat_curvature_rejected(self):
        report = validate_support(FourierSupport(1.0, [0.0, 0.5]))
        assert not report.ok
        assert any("curvature" in v[0] for v in report.violations)
        # worst violation is at alpha = 0: 1 + 0.5 - 2.0
        assert report.min_curvature == pytest.approx(-0.5, abs=1e-10)

    def test_negative_support_rejected(self):
        report = validate_support(FourierSupport(0.1, [0.2]))
        assert not report.ok
        assert any("support" in v[0] for v in report.violations)

    def test_domain_from_spec_raises(self):
        with pytest.raises(DomainValidationError):
            domain_from_spec({"kind": "fourier", "a0": 1.0, "cos": [0.0, 0.5]})


class TestOmegaPairing:
    def test_antisymmetric_bilinear(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            u, v, w = rng.normal(size=(3, 2))
            s, t = rng.normal(size=2)
            assert omega(u, v) == pytest.approx(-omega(v, u), abs=1e-12)
            assert omega(s * u + t * w, v) == pytest.approx(
                s * omega(u, v) + t * omega(w, v), abs=1e-12
            )

    def test_tangent_frame(self):
        f = TangentFrame.at(0.8)
        assert np.linalg.norm(f.e) == pytest.approx(1.0)
        assert float(np.dot(f.e, f.je)) == pytest.approx(0.0, abs=1e-15)
        assert omega(f.je, f.e) == pytest.approx(-1.0, abs=1e-15)


class TestSpecsAndProjection:
    def test_round_trip(self, tmp_path):
        spec = {"kind": "ellipse", "semi_axis_x": 2.0, "semi_axis_y": 1.0,
                "rotation": 0.25, "name": "e"}
        path = tmp_path / "e.json"
        path.write_text(json.dumps(spec))
        p = load_domain(path)
        assert isinstance(p, EllipseSupport)
        back = domain_to_spec(p)
        assert back["semi_axis_x"] == 2.0 and back["rotation"] == 0.25

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            domain_from_spec({"kind": "spline"})

    def test_ellipse_fourier_projection(self, ellipse):
        proj = fourier_projection(ellipse, n_modes=64)
        assert abs(perimeter(proj) - perimeter(ellipse)) < 1e-10
        assert abs(area(proj) - area(ellipse)) < 1e-10
        grid = np.linspace(0, TWO_PI, 100)
        assert np.abs(proj.eval(grid) - ellipse.eval(grid)).max() < 1e-10

    def test_sampled_domains_valid(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            p = sample_fourier_domain(rng)
            assert validate_support(p).ok
            assert np.abs(p.cos[:2]).max() == 0.0  # only modes 3..6

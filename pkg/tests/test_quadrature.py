import math

import numpy as np
import pytest
from scipy.special import ellipe

from sympb import (
    FourierSupport,
    GridConvergenceError,
    GridSpec,
    ReparamSpec,
    bialy_report,
    bialy_torus,
    halving_check,
    identity_area,
    identity_l12sq,
    identity_reparam,
    identity_suite,
    isoperimetric_defect,
    normalize_domain,
    sample_fourier_domain,
)

PI = math.pi
FOUR_PI_SQ = 4 * PI * PI


class TestGridSpec:
    def test_defaults(self):
        g = GridSpec()
        assert (g.n1, g.n2, g.n) == (512, 512, 4096)

    @pytest.mark.parametrize("bad", [{"n1": 100}, {"n1": 32}, {"n": 1000}])
    def test_rejects_bad_sizes(self, bad):
        with pytest.raises(ValueError):
            GridSpec(**bad)


class TestCircleClosedForms:
    def test_area_identity(self, circle):
        r = identity_area(circle)
        assert r.lhs == pytest.approx(-FOUR_PI_SQ, abs=1e-9)
        assert r.rhs == pytest.approx(-FOUR_PI_SQ, abs=1e-9)
        assert r.extra["raw_rhs"] == pytest.approx(-FOUR_PI_SQ, abs=1e-9)

    def test_l12sq_identity(self, circle):
        r = identity_l12sq(circle)
        assert r.lhs == pytest.approx(FOUR_PI_SQ, abs=1e-9)
        assert r.rhs == pytest.approx(FOUR_PI_SQ, abs=1e-9)

    def test_bialy_cancels(self, circle):
        assert bialy_torus(circle) == pytest.approx(0.0, abs=1e-10)


class TestIdentities:
    def test_ellipse_self_consistency(self, ellipse):
        assert identity_area(ellipse).rel_err < 1e-8
        assert identity_l12sq(ellipse).rel_err < 1e-8

    def test_rotation_invariance_of_rhs(self):
        base = FourierSupport(1.0, [0.0, 0.0, 0.05])
        r0 = identity_l12sq(base)
        # rotate by shifting every mode's phase
        sigma = 0.6
        c3 = 0.05 * math.cos(3 * sigma)
        s3 = 0.05 * math.sin(3 * sigma)
        rot = FourierSupport(1.0, [0.0, 0.0, c3], [0.0, 0.0, s3])
        r1 = identity_l12sq(rot)
        assert r1.rhs == pytest.approx(r0.rhs, rel=1e-10)

    def test_scaling_degree(self, random_domains):
        # both sides are built from two factors quadratic in lengths: lambda^4
        p = random_domains[0]
        lam = 1.3
        scaled = FourierSupport(lam * p.a0, lam * p.cos, lam * p.sin)
        r = identity_area(p)
        rs = identity_area(scaled)
        assert rs.lhs == pytest.approx(lam ** 4 * r.lhs, rel=1e-10)
        assert rs.rhs == pytest.approx(lam ** 4 * r.rhs, rel=1e-10)

    def test_identity_preset_reduces(self, ellipse):
        base = identity_area(ellipse)
        rep_area, rep_l12 = identity_reparam(ellipse, ReparamSpec.identity())
        assert rep_area.lhs == pytest.approx(base.lhs, rel=1e-13)
        assert rep_l12.lhs == pytest.approx(identity_l12sq(ellipse).lhs, rel=1e-13)

    def test_arclength_circle_closed_values(self, circle):
        rep_area, rep_l12 = identity_reparam(circle, ReparamSpec.arclength(circle))
        assert rep_area.lhs == pytest.approx(-FOUR_PI_SQ, abs=1e-9)  # -4 pi A
        assert rep_l12.lhs == pytest.approx(FOUR_PI_SQ, abs=1e-9)    # (2 pi)^2

    def test_arclength_ellipse_area_form(self, ellipse):
        rep_area, _ = identity_reparam(ellipse, ReparamSpec.arclength(ellipse))
        assert rep_area.lhs == pytest.approx(-8 * PI * PI, abs=1e-6)
        assert rep_area.rel_err < 1e-8

    def test_random_family_suite(self, random_domains):
        for p in random_domains[:3]:
            for report in identity_suite(p):
                assert report.rel_err < 1e-7, report.name


class TestHalving:
    def test_circle_components(self, circle):
        r_area = halving_check(circle, integrand="area")
        assert r_area.extra["torus"] == pytest.approx(-FOUR_PI_SQ, abs=1e-8)
        assert r_area.extra["torus"] / r_area.extra["strip"] == pytest.approx(2.0, rel=1e-10)
        r_full = halving_check(circle, integrand="bialy")
        assert abs(r_full.lhs) < 1e-9 and abs(r_full.rhs) < 1e-9

    def test_ellipse(self, ellipse):
        for which in ("bialy", "area", "l12sq"):
            assert halving_check(ellipse, integrand=which).rel_err < 1e-8

    def test_antisymmetry_spot_checks(self, ellipse):
        from sympb import gen_derivs
        d_ab = gen_derivs(ellipse, 0.4, 1.7)
        d_ba = gen_derivs(ellipse, 1.7, 0.4)
        assert d_ab.L12 == pytest.approx(-d_ba.L12, abs=1e-13)
        assert d_ab.L11 == pytest.approx(-d_ba.L22, abs=1e-13)

    def test_unknown_integrand(self, circle):
        with pytest.raises(ValueError):
            halving_check(circle, integrand="everything")


class TestDefect:
    def test_circle_zero(self, circle):
        assert isoperimetric_defect(circle) == pytest.approx(0.0, abs=1e-10)
        big = FourierSupport(3.7)
        assert isoperimetric_defect(big) == pytest.approx(0.0, abs=1e-9)

    def test_ellipse_value(self, ellipse):
        ell_perim = 8 * ellipe(0.75)
        expected = ell_perim ** 2 - 4 * PI * (2 * PI)
        d = isoperimetric_defect(ellipse)
        assert d == pytest.approx(expected, abs=1e-8)
        assert d == pytest.approx(14.909, abs=1e-3)

    def test_wavy_value(self, wavy):
        # area = pi (1 + (1 - 9) 0.01 / 2) = 0.96 pi, perimeter stays 2 pi
        expected = FOUR_PI_SQ - 4 * PI * (0.96 * PI)
        assert isoperimetric_defect(wavy) == pytest.approx(expected, abs=1e-10)

    def test_never_negative(self, random_domains):
        for p in random_domains:
            assert isoperimetric_defect(p) > -1e-10


class TestBialyReport:
    def test_normalized_circle(self, circle):
        rep = bialy_report(circle)
        assert rep.total == pytest.approx(0.0, abs=1e-9)
        assert rep.defect == pytest.approx(0.0, abs=1e-10)

    def test_normalized_ellipse(self, ellipse):
        pt, _ = normalize_domain(ellipse)
        rep = bialy_report(pt)
        assert abs(rep.total) < 1e-6
        assert abs(rep.fourier2_cos) < 1e-7 and abs(rep.fourier2_sin) < 1e-7

    def test_wavy_sum_equals_defect(self, wavy):
        pt, _ = normalize_domain(wavy)
        rep = bialy_report(pt)
        assert rep.total == pytest.approx(rep.defect, abs=1e-6)
        assert rep.total > 0.05


class TestConvergenceGuard:
    def test_grid_doubling_is_flat(self, random_domains):
        p = random_domains[1]
        coarse = bialy_torus(p, grid=GridSpec(n1=256, n2=256), check=False)
        fine = bialy_torus(p, grid=GridSpec(n1=512, n2=512), check=False)
        assert abs(fine - coarse) < 1e-9 * max(1.0, abs(fine))

    def test_guard_triggers_on_impossible_tolerance(self, ellipse):
        with pytest.raises(GridConvergenceError):
            bialy_torus(ellipse, check=True, conv_tol=1e-30)

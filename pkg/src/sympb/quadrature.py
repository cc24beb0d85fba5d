"""Spectral quadrature for the integral identities of the generating function.

Single integrals use the periodic trapezoid rule on uniform grids and double
integrals its tensor product; for smooth periodic integrands this converges
faster than any polynomial order, so the default 512 x 512 torus grid is
ample and results are reproducible (no adaptivity). Summation is numpy's
pairwise reduction, independent of evaluation order.

Reparametrizations alpha = g(s) are specified through the positive weight
h(alpha) = g'(g^{-1}(alpha)). The uniform grid in s is built by inverting
the cumulative integral of 1/h (computed spectrally from its Fourier
coefficients); the double integrals are then evaluated directly in the s
parameter, while all single-integral right-hand sides stay in alpha, so the
two sides of each identity go through genuinely different code paths.

The half phase-space integral (gap in (0, pi)) uses Gauss-Legendre nodes in
the gap coordinate over the shifted rectangle: the integrand vanishes at
both gap edges and interior nodes avoid them entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import (
    TWO_PI,
    area,
    boundary_derivatives,
    boundary_point,
    perimeter,
)

_DEFAULT_CONV_TOL = 1e-7


class GridConvergenceError(RuntimeError):
    """Halving the grid moved the result more than the tolerance allows."""


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grids: n1 x n2 for double integrals, n for single."""

    n1: int = 512
    n2: int = 512
    n: int = 4096

    def __post_init__(self):
        for label, size in (("n1", self.n1), ("n2", self.n2), ("n", self.n)):
            if size < 64 or not _is_pow2(size):
                raise ValueError(f"{label} must be a power of two >= 64, got {size}")

    def halved(self):
        return GridSpec(self.n1 // 2, self.n2 // 2, self.n)


@dataclass(frozen=True)
class ReparamSpec:
    """Parameter change with weight h(alpha) > 0 and its derivative dh/dalpha."""

    name: str
    h: Callable
    dh: Callable

    @staticmethod
    def identity():
        return ReparamSpec(
            "identity",
            lambda a: np.ones_like(np.asarray(a, dtype=float)),
            lambda a: np.zeros_like(np.asarray(a, dtype=float)),
        )

    @staticmethod
    def arclength(p):
        """Arc length: h = 1 / (p'' + p), dh = -(p''' + p') / (p'' + p)^2."""

        def h(a):
            return 1.0 / (np.asarray(p.eval(a, 2)) + np.asarray(p.eval(a, 0)))

        def dh(a):
            rad = np.asarray(p.eval(a, 2)) + np.asarray(p.eval(a, 0))
            return -(np.asarray(p.eval(a, 3)) + np.asarray(p.eval(a, 1))) / (rad * rad)

        return ReparamSpec("arc-length", h, dh)


@dataclass(frozen=True)
class IdentityReport:
    """Two independently computed values of one identity, with error measures."""

    name: str
    lhs: float
    rhs: float
    abs_err: float
    rel_err: float
    grid: tuple
    extra: dict = field(default_factory=dict)

    @classmethod
    def build(cls, name, lhs, rhs, grid, **extra):
        abs_err = abs(lhs - rhs)
        rel_err = abs_err / max(abs(lhs), abs(rhs), 1.0)
        return cls(name, float(lhs), float(rhs), abs_err, rel_err, tuple(grid), extra)


def periodic_integral(values, period=TWO_PI):
    """Trapezoid rule on a uniform periodic grid (equal-weight mean)."""
    values = np.asarray(values, dtype=float)
    return float(values.mean() * period)


def _uniform(n):
    return np.arange(n) * (TWO_PI / n)


def _fourier_antiderivative(w_samples):
    """Antiderivative of a sampled periodic function, s(0) = 0, via FFT.

    Returns (mean, callable); s(alpha) = mean * alpha + periodic part.
    """
    nf = w_samples.size
    coef = np.fft.rfft(w_samples) / nf
    mean = float(coef[0].real)
    ak = 2.0 * coef[1:].real
    bk = -2.0 * coef[1:].imag
    k = np.arange(1, coef.size, dtype=float)
    keep = (np.abs(ak) + np.abs(bk)) > 1e-16 * max(abs(mean), 1.0)
    ak, bk, k = ak[keep], bk[keep], k[keep]

    def s_of(alpha):
        alpha = np.asarray(alpha, dtype=float)
        if k.size == 0:
            return mean * alpha
        arg = np.multiply.outer(alpha, k)
        per = ((ak * np.sin(arg) - bk * (np.cos(arg) - 1.0)) / k).sum(axis=-1)
        return mean * alpha + per

    return mean, s_of


def _reparam_nodes(p, reparam, n, nf=8192):
    """Alpha positions of the uniform grid in the s parameter, plus span S."""
    if reparam.name == "identity":
        return _uniform(n), TWO_PI
    w = 1.0 / np.asarray(reparam.h(_uniform(nf)), dtype=float)
    mean, s_of = _fourier_antiderivative(w)
    span = mean * TWO_PI
    targets = np.arange(n) * (span / n)
    alpha = targets / mean
    for _ in range(60):
        delta = (s_of(alpha) - targets) * np.asarray(reparam.h(alpha), dtype=float)
        alpha = alpha - delta
        if np.abs(delta).max() < 1e-13:
            break
    else:
        raise GridConvergenceError("reparametrized grid inversion stalled")
    return alpha, span


def _omega_outer(u, v):
    """Matrix of pairings omega(u_i, v_j) for two families of plane vectors."""
    return np.outer(u[:, 0], v[:, 1]) - np.outer(u[:, 1], v[:, 0])


def _torus_parts(p, reparam, n1, n2):
    """Weighted full-square sums of the three integrand pieces in parameter s.

    Returns the double integrals of (L11 + L22) L12 and 2 L12^2 over
    [0, S]^2; their sum is the full-square value of the no-conjugate-point
    integrand (L11 + 2 L12 + L22) L12.
    """

    def fields(n):
        a, span = _reparam_nodes(p, reparam, n)
        h = np.asarray(reparam.h(a), dtype=float)
        dh = np.asarray(reparam.dh(a), dtype=float)
        g0 = boundary_point(p, a)
        g1, g2 = boundary_derivatives(p, a)
        dg = h[:, None] * g1                                   # d gamma / ds
        d2g = (h * h)[:, None] * g2 + (h * dh)[:, None] * g1   # d^2 gamma / ds^2
        return g0, dg, d2g, span / n

    x0, dx, d2x, wx = fields(n1)
    if n2 == n1:
        y0, dy, d2y, wy = x0, dx, d2x, wx
    else:
        y0, dy, d2y, wy = fields(n2)
    l12 = _omega_outer(dx, dy)
    l11 = _omega_outer(d2x, y0)
    l22 = _omega_outer(x0, d2y)
    weight = wx * wy
    return {
        "area_part": float(((l11 + l22) * l12).sum() * weight),
        "l12sq_part": float(2.0 * (l12 * l12).sum() * weight),
    }


def _bialy_value(parts):
    return parts["area_part"] + parts["l12sq_part"]


def _converged(fn, grid, conv_tol, value):
    """Re-evaluate on the halved grid and insist the value barely moves."""
    half = fn(grid.halved())
    drift = abs(half - value)
    if drift > conv_tol * max(abs(value), 1.0):
        raise GridConvergenceError(
            f"grid {grid.n1}x{grid.n2} not converged: halving moved the value by {drift:.3e}"
        )
    return drift


def bialy_torus(p, reparam=None, grid=None, check=True, conv_tol=_DEFAULT_CONV_TOL):
    """Full-square integral of (L11 + 2 L12 + L22) L12 in the chosen parameter.

    The integral over the positive phase space (gap in (0, pi)) is half of
    this value. With check=True the computation is repeated on the halved
    grid and a drift above conv_tol raises GridConvergenceError.
    """
    reparam = reparam or ReparamSpec.identity()
    grid = grid or GridSpec()
    value = _bialy_value(_torus_parts(p, reparam, grid.n1, grid.n2))
    if check:
        _converged(lambda g: _bialy_value(_torus_parts(p, reparam, g.n1, g.n2)),
                   grid, conv_tol, value)
    return value


def _second_moments(p, n, weight_pow=2, h=None):
    """Integrals of (p''+p)^weight_pow * h * {1, cos 2a, sin 2a} over a period."""
    a = _uniform(n)
    rad = np.asarray(p.eval(a, 2)) + np.asarray(p.eval(a, 0))
    w = rad ** weight_pow
    if h is not None:
        w = w * np.asarray(h(a), dtype=float)
    return (
        periodic_integral(w),
        periodic_integral(w * np.cos(2 * a)),
        periodic_integral(w * np.sin(2 * a)),
    )


def identity_area(p, grid=None, check=True, conv_tol=_DEFAULT_CONV_TOL):
    """Double integral of (L11 + L22) L12 against -2 A integral (p''+p)^2.

    The raw parametrization-free form pairs the boundary's first and second
    derivative vectors directly; with this module's orientation the matching
    sign is 2 A integral omega(gamma'', gamma'), pinned by exactness on the
    circle, and is reported in extra["raw_rhs"].
    """
    grid = grid or GridSpec()
    parts = _torus_parts(p, ReparamSpec.identity(), grid.n1, grid.n2)
    lhs = parts["area_part"]
    if check:
        _converged(lambda g: _torus_parts(p, ReparamSpec.identity(), g.n1, g.n2)["area_part"],
                   grid, conv_tol, lhs)
    f0, _, _ = _second_moments(p, grid.n)
    a_dom = area(p, grid.n)
    rhs = -2.0 * a_dom * f0
    g1, g2 = boundary_derivatives(p, _uniform(grid.n))
    raw = 2.0 * a_dom * periodic_integral(g2[:, 0] * g1[:, 1] - g2[:, 1] * g1[:, 0])
    return IdentityReport.build(
        "area-identity", lhs, rhs, (grid.n1, grid.n2, grid.n), raw_rhs=raw
    )


def identity_l12sq(p, grid=None, check=True, conv_tol=_DEFAULT_CONV_TOL):
    """2 double-integral of L12^2 against its curvature-moment Fourier form."""
    grid = grid or GridSpec()
    parts = _torus_parts(p, ReparamSpec.identity(), grid.n1, grid.n2)
    lhs = parts["l12sq_part"]
    if check:
        _converged(lambda g: _torus_parts(p, ReparamSpec.identity(), g.n1, g.n2)["l12sq_part"],
                   grid, conv_tol, lhs)
    f0, f2c, f2s = _second_moments(p, grid.n)
    rhs = f0 * f0 - f2c * f2c - f2s * f2s
    return IdentityReport.build(
        "l12sq-identity", lhs, rhs, (grid.n1, grid.n2, grid.n),
        moments=(f0, f2c, f2s),
    )


def identity_reparam(p, reparam, grid=None, check=True, conv_tol=_DEFAULT_CONV_TOL):
    """Both identities in the reparametrized variable; returns two reports.

    The double integrals run over the uniform grid in s; the right-hand
    sides carry the weights h^2 (area form) and h (Fourier form) in alpha.
    """
    grid = grid or GridSpec()
    parts = _torus_parts(p, reparam, grid.n1, grid.n2)
    if check:
        _converged(lambda g: _bialy_value(_torus_parts(p, reparam, g.n1, g.n2)),
                   grid, conv_tol, _bialy_value(parts))
    a_dom = area(p, grid.n)
    h2, _, _ = _second_moments(p, grid.n, h=lambda a: np.asarray(reparam.h(a)) ** 2)
    rep_area = IdentityReport.build(
        f"area-identity[{reparam.name}]",
        parts["area_part"], -2.0 * a_dom * h2, (grid.n1, grid.n2, grid.n),
    )
    f0, f2c, f2s = _second_moments(p, grid.n, h=reparam.h)
    rep_l12 = IdentityReport.build(
        f"l12sq-identity[{reparam.name}]",
        parts["l12sq_part"], f0 * f0 - f2c * f2c - f2s * f2s,
        (grid.n1, grid.n2, grid.n),
        moments=(f0, f2c, f2s),
    )
    return rep_area, rep_l12


_INTEGRANDS = ("bialy", "area", "l12sq")


def _strip_parts(p, n_alpha, n_delta):
    """Integrals over the open strip 0 < a2 - a1 < pi of all three integrands.

    Shifted-rectangle quadrature: Gauss-Legendre in the gap, periodic
    trapezoid in the base angle.
    """
    nodes, gl_w = np.polynomial.legendre.leggauss(n_delta)
    deltas = 0.5 * math.pi * (nodes + 1.0)
    dw = 0.5 * math.pi * gl_w
    a = _uniform(n_alpha)
    wa = TWO_PI / n_alpha
    g0a = boundary_point(p, a)
    g1a, g2a = boundary_derivatives(p, a)
    acc = {"area": 0.0, "l12sq": 0.0}
    for dlt, wd in zip(deltas, dw):
        b = a + dlt
        g0b = boundary_point(p, b)
        g1b, g2b = boundary_derivatives(p, b)
        l12 = g1a[:, 0] * g1b[:, 1] - g1a[:, 1] * g1b[:, 0]
        l11 = g2a[:, 0] * g0b[:, 1] - g2a[:, 1] * g0b[:, 0]
        l22 = g0a[:, 0] * g2b[:, 1] - g0a[:, 1] * g2b[:, 0]
        acc["area"] += wd * float(((l11 + l22) * l12).sum()) * wa
        acc["l12sq"] += wd * float(2.0 * (l12 * l12).sum()) * wa
    acc["bialy"] = acc["area"] + acc["l12sq"]
    return acc


def halving_check(p, grid=None, integrand="bialy", n_delta=None):
    """Compare twice the strip integral with the full-square integral.

    Both sides are computed independently (shifted rectangle vs torus grid).
    integrand selects the full no-conjugate-point integrand ("bialy") or one
    of its two pieces ("area", "l12sq").
    """
    if integrand not in _INTEGRANDS:
        raise ValueError(f"integrand must be one of {_INTEGRANDS}")
    grid = grid or GridSpec()
    n_delta = n_delta or max(64, grid.n1 // 4)
    strip = _strip_parts(p, grid.n1, n_delta)[integrand]
    parts = _torus_parts(p, ReparamSpec.identity(), grid.n1, grid.n2)
    torus = _bialy_value(parts) if integrand == "bialy" else parts[f"{integrand}_part"]
    return IdentityReport.build(
        f"halving[{integrand}]", 2.0 * strip, torus,
        (grid.n1, grid.n2, n_delta),
        strip=strip, torus=torus,
    )


def isoperimetric_defect(p, n=4096):
    """perimeter^2 - 4 pi area; zero exactly for circles, positive otherwise."""
    ell = perimeter(p, n)
    return float(ell * ell - 4.0 * math.pi * area(p, n))


@dataclass(frozen=True)
class BialyReport:
    """Full-square no-conjugate-point integral, its pieces, and the defect.

    In the arc-length parameter the Fourier moments are those of p'' + p;
    when the second pair vanishes (normalized domain), total equals the
    isoperimetric defect.
    """

    parametrization: str
    area_part: float
    l12sq_part: float
    total: float
    fourier0: float
    fourier2_cos: float
    fourier2_sin: float
    defect: float
    grid: tuple


def bialy_report(p, reparam=None, grid=None, check=True, conv_tol=_DEFAULT_CONV_TOL):
    """Assemble the pieces of the no-conjugate-point integral in one report.

    Defaults to the arc-length parameter, the setting in which the total
    collapses to defect minus the squared second Fourier moments.
    """
    reparam = reparam or ReparamSpec.arclength(p)
    grid = grid or GridSpec()
    parts = _torus_parts(p, reparam, grid.n1, grid.n2)
    total = _bialy_value(parts)
    if check:
        _converged(lambda g: _bialy_value(_torus_parts(p, reparam, g.n1, g.n2)),
                   grid, conv_tol, total)
    f0, f2c, f2s = _second_moments(p, grid.n, h=reparam.h)
    return BialyReport(
        parametrization=reparam.name,
        area_part=parts["area_part"],
        l12sq_part=parts["l12sq_part"],
        total=total,
        fourier0=f0,
        fourier2_cos=f2c,
        fourier2_sin=f2s,
        defect=isoperimetric_defect(p, grid.n),
        grid=(grid.n1, grid.n2, grid.n),
    )


def identity_suite(p, grid=None, check=False):
    """Every identity as a report list, for the CLI table and the test gate."""
    grid = grid or GridSpec()
    reports = [
        identity_area(p, grid, check=check),
        identity_l12sq(p, grid, check=check),
    ]
    arc = ReparamSpec.arclength(p)
    rep4, rep5 = identity_reparam(p, arc, grid, check=check)
    reports.extend([rep4, rep5])
    # closed arc-length right-hand sides: -4 pi A, and moments of p'' + p itself
    reports.append(IdentityReport.build(
        "area-identity[arc-length closed]",
        rep4.lhs, -4.0 * math.pi * area(p, grid.n), rep4.grid,
    ))
    f0, f2c, f2s = _second_moments(p, grid.n, weight_pow=1)
    reports.append(IdentityReport.build(
        "l12sq-identity[arc-length closed]",
        rep5.lhs, f0 * f0 - f2c * f2c - f2s * f2s, rep5.grid,
    ))
    for which in _INTEGRANDS:
        reports.append(halving_check(p, grid, integrand=which))
    return reports

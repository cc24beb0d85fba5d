"""The symplectic billiard map and its generating function.

A phase point is an ordered pair of lifted tangent angles (a1, a2) with
0 < a2 - a1 < pi (the open positive strip). One step maps (a1, a2) to
(a2, a3), where a3 is the unique angle in (a2, a2 + pi) at which the chord
from gamma(a1) to gamma(a3) is parallel to the tangent at gamma(a2):

    g(a3) = omega(gamma'(a2), gamma(a3) - gamma(a1)) = 0.

The generating function is L(a1, a2) = omega(gamma(a1), gamma(a2)); the map
is the stationarity condition L2(a1, a2) + L1(a2, a3) = 0 of the action sum.

Angles stay lifted (real valued, never reduced mod 2 pi) so rotation numbers
and gap monotonicity are well defined; reduction to the circle happens only
inside geometry evaluation. g is strictly increasing on the bracket, with
g(a2) < 0 < g(a2 + pi) guaranteed by convexity, so the solver bisects the
bracket down to a short interval and then polishes with guarded Newton
steps (analytic g'(x) = omega(gamma'(a2), gamma'(x))).

All operations are pure functions over immutable geometry: orbits are value
objects, and many initial conditions can be iterated concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    TWO_PI,
    boundary_derivatives,
    boundary_point,
    boundary_tangent,
    curvature_radius,
    omega,
    perimeter,
)

# diagonal-adjacent pairs are rejected rather than specially handled
MIN_GAP = 1e-6

_BISECT_WIDTH = 1e-3
_NEWTON_TOL = 1e-12


class RootBracketError(RuntimeError):
    """The sign bracket for the reflection condition failed (invalid domain?)."""


class SolverToleranceError(RuntimeError):
    """The root polish did not reach the requested tolerance."""


@dataclass(frozen=True)
class PhasePoint:
    """Ordered pair of lifted angles with gap strictly inside (0, pi)."""

    a1: float
    a2: float

    def __post_init__(self):
        gap = self.a2 - self.a1
        if not (MIN_GAP <= gap < math.pi):
            raise ValueError(
                f"phase point gap {gap:.3e} outside [{MIN_GAP:.0e}, pi)"
            )

    @property
    def gap(self):
        return self.a2 - self.a1


@dataclass(frozen=True)
class SCoords:
    """Twist coordinates s1 = omega(gamma'(a1), gamma(a2)), s2 = omega(gamma(a1), gamma'(a2))."""

    s1: float
    s2: float


@dataclass(frozen=True)
class GenDerivs:
    """Generating function and partials at a phase point, with the C2 bound K."""

    L: float
    L1: float
    L2: float
    L11: float
    L12: float
    L22: float
    K: float


@dataclass
class Configuration:
    """Finite billiard trajectory: lifted angles plus stationarity residuals.

    alphas has the two seed angles followed by one entry per step;
    residuals[k-1] = omega(gamma'(a_k), gamma(a_{k+1}) - gamma(a_{k-1}))
    for the interior indices k = 1 .. len(alphas) - 2.
    """

    alphas: np.ndarray
    residuals: np.ndarray
    support: object

    def __len__(self):
        return self.alphas.size

    @property
    def gaps(self):
        return np.diff(self.alphas)


def gen_fn(p, a1, a2):
    """L(a1, a2) = omega(gamma(a1), gamma(a2)); antisymmetric in its arguments."""
    val = omega(boundary_point(p, a1), boundary_point(p, a2))
    return float(val) if np.ndim(val) == 0 else val


def c2_bound(p, n=1024):
    """Bound K with |L11|, |L22|, L12 <= K, from grid maxima of the boundary data."""
    cached = getattr(p, "_c2_bound", None)
    if cached is not None:
        return cached
    grid = np.arange(n) * (TWO_PI / n)
    g0 = boundary_point(p, grid)
    g1, g2 = boundary_derivatives(p, grid)
    sup0 = float(np.linalg.norm(g0, axis=-1).max())
    sup1 = float(np.linalg.norm(g1, axis=-1).max())
    sup2 = float(np.linalg.norm(g2, axis=-1).max())
    bound = max(sup2 * sup0, sup1 * sup1)
    try:
        p._c2_bound = bound
    except AttributeError:
        pass
    return bound


def gen_derivs(p, a1, a2):
    """All first and second partials of L at (a1, a2), in closed form.

    L1 = omega(gamma'(a1), gamma(a2)), L2 = omega(gamma(a1), gamma'(a2)),
    L11 = omega(gamma''(a1), gamma(a2)), L22 = omega(gamma(a1), gamma''(a2)),
    L12 = omega(gamma'(a1), gamma'(a2))
        = (p''+p)(a1) (p''+p)(a2) sin(a2 - a1) > 0 on the strip.
    """
    x1 = boundary_point(p, a1)
    x2 = boundary_point(p, a2)
    t1, h1 = boundary_derivatives(p, a1)
    t2, h2 = boundary_derivatives(p, a2)
    return GenDerivs(
        L=float(omega(x1, x2)),
        L1=float(omega(t1, x2)),
        L2=float(omega(x1, t2)),
        L11=float(omega(h1, x2)),
        L12=float(omega(t1, t2)),
        L22=float(omega(x1, h2)),
        K=c2_bound(p),
    )


def _solve_monotone(g, dg, lo, hi):
    """Roots of an increasing function with g(lo) < 0 < g(hi), vectorized.

    Bisection narrows the bracket to ~1e-3, then Newton polishes; any Newton
    iterate leaving its bracket falls back to the midpoint, so the bracket
    never breaks.
    """
    glo = g(lo)
    ghi = g(hi)
    if np.any(glo >= 0.0) or np.any(ghi <= 0.0):
        raise RootBracketError("reflection condition not bracketed; domain invalid?")
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    n_bis = int(math.ceil(math.log2(math.pi / _BISECT_WIDTH)))
    for _ in range(n_bis):
        mid = 0.5 * (lo + hi)
        neg = g(mid) < 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    x = 0.5 * (lo + hi)
    for _ in range(80):
        gx = g(x)
        neg = gx < 0.0
        lo = np.where(neg, x, lo)
        hi = np.where(neg, hi, x)
        nx = x - gx / dg(x)
        off = ~np.isfinite(nx) | (nx <= lo) | (nx >= hi)
        nx = np.where(off, 0.5 * (lo + hi), nx)
        done = np.abs(nx - x) < _NEWTON_TOL
        x = nx
        if done.all():
            return x
    raise SolverToleranceError("root polish did not converge")


def _step_arrays(p, a1, a2):
    """Forward image angle a3 for arrays of phase points (a1, a2)."""
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    t2 = boundary_tangent(p, a2)
    const = omega(t2, boundary_point(p, a1))

    def g(x):
        return omega(t2, boundary_point(p, x)) - const

    def dg(x):
        return omega(t2, boundary_tangent(p, x))

    return _solve_monotone(g, dg, a2, a2 + math.pi)


def _scalar_gamma(p, a):
    p0 = p.eval(a, 0)
    p1 = p.eval(a, 1)
    s, c = math.sin(a), math.cos(a)
    return p0 * c - p1 * s, p0 * s + p1 * c


def _step_scalar(p, a1, a2):
    """Scalar fast path of _step_arrays; same bracket and polish scheme.

    The positive factor (p''+p)(a2) of the reflection condition is dropped:
    g(x) = omega(e(a2), gamma(x) - gamma(a1)) has the same root and signs,
    and g'(x) = (p''+p)(x) sin(x - a2) in closed form.
    """
    s2, c2 = math.sin(a2), math.cos(a2)
    x1, y1 = _scalar_gamma(p, a1)

    def g(x):
        gx, gy = _scalar_gamma(p, x)
        return -s2 * (gy - y1) - c2 * (gx - x1)

    lo, hi = a2, a2 + math.pi
    if g(lo) >= 0.0 or g(hi) <= 0.0:
        raise RootBracketError("reflection condition not bracketed; domain invalid?")
    n_bis = int(math.ceil(math.log2(math.pi / _BISECT_WIDTH)))
    for _ in range(n_bis):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(80):
        gx = g(x)
        if gx < 0.0:
            lo = x
        else:
            hi = x
        slope = (p.eval(x, 2) + p.eval(x, 0)) * math.sin(x - a2)
        nx = x - gx / slope if slope != 0.0 else 0.5 * (lo + hi)
        if not (lo < nx < hi):
            nx = 0.5 * (lo + hi)
        if abs(nx - x) < _NEWTON_TOL:
            return nx
        x = nx
    raise SolverToleranceError("root polish did not converge")


def _inverse_arrays(p, a2, a3):
    """Preimage angle a1 for arrays of phase points (a2, a3)."""
    a2 = np.asarray(a2, dtype=float)
    a3 = np.asarray(a3, dtype=float)
    t2 = boundary_tangent(p, a2)
    const = omega(t2, boundary_point(p, a3))

    def g(x):
        return const - omega(t2, boundary_point(p, x))

    def dg(x):
        return -omega(t2, boundary_tangent(p, x))

    return _solve_monotone(g, dg, a2 - math.pi, a2)


def step(p, q: PhasePoint) -> PhasePoint:
    """One application of the billiard map, (a1, a2) -> (a2, a3)."""
    return PhasePoint(q.a2, _step_scalar(p, q.a1, q.a2))


def step_many(p, a1, a2):
    """Vectorized forward step; returns the array of image angles a3."""
    return _step_arrays(p, a1, a2)


def inverse_step(p, q: PhasePoint) -> PhasePoint:
    """Inverse map, (a2, a3) -> (a1, a2); step(inverse_step(q)) == q."""
    a1 = _inverse_arrays(p, np.array([q.a1]), np.array([q.a2]))[0]
    return PhasePoint(float(a1), q.a1)


def orbit(p, start: PhasePoint, n: int) -> Configuration:
    """Iterate n forward steps and record stationarity residuals.

    The residual at interior index k is
    omega(gamma'(a_k), gamma(a_{k+1}) - gamma(a_{k-1})), identically the
    stationarity sum L1(a_k, a_{k+1}) + L2(a_{k-1}, a_k).
    """
    alphas = np.empty(n + 2)
    alphas[0] = start.a1
    alphas[1] = start.a2
    for k in range(n):
        a3 = _step_scalar(p, alphas[k], alphas[k + 1])
        gap = a3 - alphas[k + 1]
        if not (0.0 < gap < math.pi):
            raise RootBracketError(f"step left the phase strip at index {k}")
        alphas[k + 2] = a3
    if n > 0:
        mid_t = boundary_tangent(p, alphas[1:-1])
        chord = boundary_point(p, alphas[2:]) - boundary_point(p, alphas[:-2])
        residuals = omega(mid_t, chord)
    else:
        residuals = np.empty(0)
    return Configuration(alphas=alphas, residuals=residuals, support=p)


def s_coords(p, q: PhasePoint) -> SCoords:
    x1 = boundary_point(p, q.a1)
    x2 = boundary_point(p, q.a2)
    return SCoords(
        s1=float(omega(boundary_tangent(p, q.a1), x2)),
        s2=float(omega(x1, boundary_tangent(p, q.a2))),
    )


def area_preservation_many(p, a1, a2, h=1e-5):
    """Measure-invariance ratios for arrays of phase points, batched.

    The Jacobian determinant of (a1, a2) -> (a2, a3) reduces to
    -d a3/d a1 (the first row is (0, 1)), estimated by central differences;
    the returned ratio L12(a2, a3) det / L12(a1, a2) equals 1 for the exact
    map up to finite-difference error.
    """
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    stacked_a1 = np.concatenate([a1 + h, a1 - h, a1])
    stacked_a2 = np.concatenate([a2, a2, a2])
    a3 = _step_arrays(p, stacked_a1, stacked_a2)
    n = a1.size
    det = -(a3[:n] - a3[n:2 * n]) / (2 * h)
    a3_mid = a3[2 * n:]
    l12_in = curvature_radius(p, a1) * curvature_radius(p, a2) * np.sin(a2 - a1)
    l12_out = curvature_radius(p, a2) * curvature_radius(p, a3_mid) * np.sin(a3_mid - a2)
    return l12_out * det / l12_in


def area_preservation_check(p, q: PhasePoint, h=1e-5):
    """Measure-invariance ratio at a single phase point; must equal 1."""
    return float(area_preservation_many(p, np.array([q.a1]), np.array([q.a2]), h)[0])


def rotation_number(cfg: Configuration):
    """Average lifted gap divided by 2 pi."""
    if len(cfg) < 3:
        raise ValueError("orbit too short for a rotation number")
    return float((cfg.alphas[-1] - cfg.alphas[0]) / ((len(cfg) - 1) * TWO_PI))


def stationarity_scale(p):
    """Natural residual scale, (perimeter / 2 pi)^2; L is quadratic in lengths."""
    r = perimeter(p) / TWO_PI
    return r * r

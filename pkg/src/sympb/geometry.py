"""Strictly convex planar domains represented by their support function.

Conventions, fixed once and inherited by every other module:

* the boundary is parametrized by the tangent angle ``alpha``;
* ``e(alpha) = (-sin alpha, cos alpha)`` is the unit tangent;
* ``J`` is the quarter turn ``(x, y) -> (-y, x)``;
* the boundary point whose tangent direction is ``e(alpha)`` is
  ``gamma(alpha) = p'(alpha) e(alpha) - p(alpha) J e(alpha)``,
  where ``p`` is the support function (distance from the origin to the
  tangent line);
* orientation is counter-clockwise, so the curvature radius ``p'' + p``
  must be strictly positive for ``alpha`` to be a global parameter.

Domains come in two exact flavours: truncated Fourier series, differentiated
term by term, and ellipses kept in closed form so that tests can use exact
oracles. ``fourier_projection`` converts anything to a series when an
approximate Fourier form is wanted.

Everything here is immutable after construction and free of shared state;
all operations are pure functions, safe for concurrent use.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# default sampling density for validity checks and single integrals
VALIDATION_GRID = 4096


class DomainValidationError(ValueError):
    """A support function violates positivity or curvature constraints."""

    def __init__(self, violations):
        self.violations = list(violations)
        detail = "; ".join(
            f"{kind} at alpha={alpha:.6f} (value {value:.3e})"
            for kind, alpha, value in self.violations[:8]
        )
        super().__init__(f"invalid domain: {detail}")


def omega(u, v):
    """Area pairing omega(u, v) = ux*vy - uy*vx, broadcasting over leading axes."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def quarter_turn(v):
    """J v = (-vy, vx), the rotation by +pi/2 used in all boundary formulas."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def unit_tangent(alpha):
    """e(alpha) = (-sin alpha, cos alpha)."""
    alpha = np.asarray(alpha, dtype=float)
    return np.stack([-np.sin(alpha), np.cos(alpha)], axis=-1)


@dataclass(frozen=True)
class TangentFrame:
    """Unit tangent and its quarter turn at a boundary angle."""

    angle: float
    e: np.ndarray
    je: np.ndarray

    @classmethod
    def at(cls, alpha):
        e = unit_tangent(float(alpha))
        return cls(float(alpha), e, quarter_turn(e))


def _check_order(order):
    if order not in (0, 1, 2, 3):
        raise ValueError(f"derivative order must be in 0..3, got {order!r}")


class SupportFunction:
    """Positive support function with derivatives up to third order.

    Subclasses implement ``eval(alpha, order)`` for order 0..3; boundary
    points, integrals and validation are derived from that single method.
    """

    name = "domain"

    def eval(self, alpha, order=0):
        raise NotImplementedError

    def derivs(self, alpha, upto=3):
        """Tuple (p, p', ..., p^(upto)) at alpha."""
        return tuple(self.eval(alpha, k) for k in range(upto + 1))


class FourierSupport(SupportFunction):
    """p(alpha) = a0 + sum_k ck cos(k alpha) + sk sin(k alpha), k = 1..N."""

    def __init__(self, a0, cos=(), sin=(), name=None):
        self.a0 = float(a0)
        self.cos = np.atleast_1d(np.asarray(cos, dtype=float))
        self.sin = np.atleast_1d(np.asarray(sin, dtype=float))
        if self.cos.size != self.sin.size:
            n = max(self.cos.size, self.sin.size)
            self.cos = np.pad(self.cos, (0, n - self.cos.size))
            self.sin = np.pad(self.sin, (0, n - self.sin.size))
        self._k = np.arange(1, self.cos.size + 1, dtype=float)
        # nonzero terms as plain floats for the scalar fast path
        self._terms = [
            (float(k), float(c), float(s))
            for k, c, s in zip(self._k, self.cos, self.sin)
            if c != 0.0 or s != 0.0
        ]
        if name is not None:
            self.name = name

    def eval(self, alpha, order=0):
        _check_order(order)
        # d^m/da^m cos(ka) = k^m cos(ka + m pi/2), same shift for sin
        shift = order * (math.pi / 2.0)
        if np.ndim(alpha) == 0:
            a = float(alpha)
            out = self.a0 if order == 0 else 0.0
            for k, c, s in self._terms:
                km = k ** order
                out += km * (c * math.cos(k * a + shift) + s * math.sin(k * a + shift))
            return out
        a = np.asarray(alpha, dtype=float)
        if self._k.size:
            arg = np.multiply.outer(a, self._k) + shift
            km = self._k ** order
            out = (self.cos * km * np.cos(arg) + self.sin * km * np.sin(arg)).sum(axis=-1)
        else:
            out = np.zeros_like(a)
        if order == 0:
            out = out + self.a0
        return out


class EllipseSupport(SupportFunction):
    """Ellipse with semi-axes a >= b > 0 rotated by ``rotation``, closed form.

    The support function in the tangent-angle parameter is
    sqrt(a^2 cos^2 t + b^2 sin^2 t) with t = alpha - rotation; derivatives
    are exact. The ellipse is also the affine image of the unit circle,
    gamma(u) = R_rot (a cos u, b sin u); ``u_of_alpha``/``alpha_of_u``
    convert between the circle parameter u and the tangent angle, lifted
    continuously (the two angles always share the same quadrant).
    """

    def __init__(self, a, b, rotation=0.0, name=None):
        if not (a > 0 and b > 0):
            raise ValueError("semi-axes must be positive")
        self.a = float(a)
        self.b = float(b)
        self.rotation = float(rotation)
        if name is not None:
            self.name = name

    def eval(self, alpha, order=0):
        _check_order(order)
        scalar = np.ndim(alpha) == 0
        if scalar:
            t = float(alpha) - self.rotation
            c2, s2 = math.cos(2 * t), math.sin(2 * t)
            sqrt = math.sqrt
        else:
            t = np.asarray(alpha, dtype=float) - self.rotation
            c2, s2 = np.cos(2 * t), np.sin(2 * t)
            sqrt = np.sqrt
        aa, bb = self.a * self.a, self.b * self.b
        q = 0.5 * (aa + bb) + 0.5 * (aa - bb) * c2
        q1 = (bb - aa) * s2
        q2 = 2.0 * (bb - aa) * c2
        q3 = -4.0 * (bb - aa) * s2
        p = sqrt(q)
        if order == 0:
            out = p
        elif order == 1:
            out = q1 / (2 * p)
        elif order == 2:
            out = q2 / (2 * p) - q1 * q1 / (4 * q * p)
        else:
            out = q3 / (2 * p) - 3 * q1 * q2 / (4 * q * p) + 3 * q1 ** 3 / (8 * q * q * p)
        return out

    def u_of_alpha(self, alpha):
        """Circle parameter of the boundary point with tangent angle alpha."""
        t = np.asarray(alpha, dtype=float) - self.rotation
        base = np.arctan2(self.b * np.sin(t), self.a * np.cos(t))
        u = base + TWO_PI * np.round((t - base) / TWO_PI)
        return float(u) if np.ndim(alpha) == 0 else u

    def alpha_of_u(self, u):
        """Tangent angle at the boundary point gamma(u), lifted near u."""
        uu = np.asarray(u, dtype=float)
        base = np.arctan2(self.a * np.sin(uu), self.b * np.cos(uu))
        t = base + TWO_PI * np.round((uu - base) / TWO_PI)
        out = t + self.rotation
        return float(out) if np.ndim(u) == 0 else out

    def point_of_u(self, u):
        """Boundary point R_rot (a cos u, b sin u)."""
        uu = np.asarray(u, dtype=float)
        x = self.a * np.cos(uu)
        y = self.b * np.sin(uu)
        cr, sr = math.cos(self.rotation), math.sin(self.rotation)
        return np.stack([cr * x - sr * y, sr * x + cr * y], axis=-1)


def support_eval(p, alpha, order=0):
    """Evaluate p or one of its first three derivatives at alpha."""
    _check_order(order)
    return p.eval(alpha, order)


def boundary_point(p, alpha):
    """gamma(alpha) = p' e - p J e; works on scalars and arrays."""
    p0 = np.asarray(p.eval(alpha, 0), dtype=float)
    p1 = np.asarray(p.eval(alpha, 1), dtype=float)
    e = unit_tangent(alpha)
    return p1[..., None] * e - p0[..., None] * quarter_turn(e)


def boundary_tangent(p, alpha):
    """gamma'(alpha) = (p'' + p) e(alpha)."""
    rad = np.asarray(p.eval(alpha, 2), dtype=float) + np.asarray(p.eval(alpha, 0), dtype=float)
    return rad[..., None] * unit_tangent(alpha)


def boundary_derivatives(p, alpha):
    """(gamma', gamma'') with gamma'' = (p''' + p') e + (p'' + p) J e."""
    p0, p1, p2, p3 = p.derivs(alpha)
    rad = np.asarray(p2, dtype=float) + np.asarray(p0, dtype=float)
    jerk = np.asarray(p3, dtype=float) + np.asarray(p1, dtype=float)
    e = unit_tangent(alpha)
    je = quarter_turn(e)
    return rad[..., None] * e, jerk[..., None] * e + rad[..., None] * je


def curvature_radius(p, alpha):
    """p''(alpha) + p(alpha), strictly positive on valid domains."""
    p0 = p.eval(alpha, 0)
    p2 = p.eval(alpha, 2)
    return p0 + p2


def conjugate_param(alpha):
    """Angle of the unique point with parallel tangent, alpha + pi mod 2 pi."""
    return np.mod(np.asarray(alpha, dtype=float) + math.pi, TWO_PI) if np.ndim(alpha) else (float(alpha) + math.pi) % TWO_PI


def _uniform_grid(n):
    return np.arange(n) * (TWO_PI / n)


def perimeter(p, n=VALIDATION_GRID):
    """Boundary length, the periodic-trapezoid value of the integral of p."""
    grid = _uniform_grid(n)
    return float(np.mean(p.eval(grid, 0)) * TWO_PI)


def area(p, n=VALIDATION_GRID):
    """Enclosed area, 1/2 integral of (p'' + p) p."""
    grid = _uniform_grid(n)
    p0 = p.eval(grid, 0)
    rad = p0 + p.eval(grid, 2)
    return float(0.5 * np.mean(rad * p0) * TWO_PI)


@dataclass(frozen=True)
class ValidationReport:
    """Grid positivity margins for a support function."""

    ok: bool
    min_support: float
    min_curvature: float
    violations: tuple

    def __str__(self):
        if self.ok:
            return (f"valid domain: min p = {self.min_support:.6g}, "
                    f"min p''+p = {self.min_curvature:.6g}")
        lines = [f"invalid domain ({len(self.violations)} violations):"]
        for kind, alpha, value in self.violations[:8]:
            lines.append(f"  {kind} at alpha={alpha:.6f}: {value:.6g}")
        return "\n".join(lines)


def validate_support(p, n=VALIDATION_GRID):
    """Check p > 0 and p'' + p > 0 on a uniform grid, reporting margins."""
    grid = _uniform_grid(n)
    p0 = np.asarray(p.eval(grid, 0), dtype=float)
    rad = p0 + np.asarray(p.eval(grid, 2), dtype=float)
    violations = []
    for idx in np.flatnonzero(p0 <= 0):
        violations.append(("support not positive", float(grid[idx]), float(p0[idx])))
    for idx in np.flatnonzero(rad <= 0):
        violations.append(("curvature radius not positive", float(grid[idx]), float(rad[idx])))
    return ValidationReport(
        ok=not violations,
        min_support=float(p0.min()),
        min_curvature=float(rad.min()),
        violations=tuple(violations),
    )


def require_valid(p, n=VALIDATION_GRID):
    """Validate and return p, raising DomainValidationError on failure."""
    report = validate_support(p, n)
    if not report.ok:
        raise DomainValidationError(report.violations)
    return p


def domain_from_spec(obj, check=True):
    """Build a support function from a JSON-style domain spec.

    Accepted forms:
      {"kind": "fourier", "a0": ..., "cos": [c1, ...], "sin": [s1, ...]}
      {"kind": "ellipse", "semi_axis_x": ..., "semi_axis_y": ..., "rotation": ...}
    Coefficient index k starts at 1; angles are radians. An optional "name"
    key is carried through. With check=True the domain is grid-validated and
    an invalid one raises DomainValidationError.
    """
    kind = obj.get("kind")
    name = obj.get("name")
    if kind == "fourier":
        p = FourierSupport(obj["a0"], obj.get("cos", ()), obj.get("sin", ()), name=name)
    elif kind == "ellipse":
        p = EllipseSupport(
            obj["semi_axis_x"], obj["semi_axis_y"], obj.get("rotation", 0.0), name=name
        )
    else:
        raise ValueError(f"unknown domain kind {kind!r}")
    if check:
        require_valid(p)
    return p


def domain_to_spec(p):
    """Inverse of domain_from_spec for the two concrete domain kinds."""
    if isinstance(p, FourierSupport):
        return {
            "kind": "fourier",
            "a0": p.a0,
            "cos": p.cos.tolist(),
            "sin": p.sin.tolist(),
            "name": p.name,
        }
    if isinstance(p, EllipseSupport):
        return {
            "kind": "ellipse",
            "semi_axis_x": p.a,
            "semi_axis_y": p.b,
            "rotation": p.rotation,
            "name": p.name,
        }
    raise TypeError(f"no spec form for {type(p).__name__}; project to Fourier first")


def load_domain(path, check=True):
    with open(path, "r", encoding="utf-8") as fh:
        return domain_from_spec(json.load(fh), check=check)


def fourier_projection(p, n_modes=64, n=VALIDATION_GRID, name=None):
    """Project any support function onto a truncated Fourier series."""
    grid = _uniform_grid(n)
    vals = np.asarray(p.eval(grid, 0), dtype=float)
    coef = np.fft.rfft(vals) / n
    n_modes = min(n_modes, n // 2 - 1)
    return FourierSupport(
        coef[0].real,
        2.0 * coef[1:n_modes + 1].real,
        -2.0 * coef[1:n_modes + 1].imag,
        name=name or f"{p.name}~fourier{n_modes}",
    )


def sample_fourier_domain(rng, modes=(3, 4, 5, 6), amplitude=0.05, max_tries=500):
    """Draw a random valid Fourier domain with a0 = 1.

    Coefficients for mode k are uniform in [-amp_k, amp_k] with
    amp_k = min(amplitude, 0.5 / (k^2 - 1)), which keeps the curvature
    radius positive for most draws; invalid draws are rejected.
    """
    modes = tuple(modes)
    kmax = max(modes)
    for _ in range(max_tries):
        cos = np.zeros(kmax)
        sin = np.zeros(kmax)
        for k in modes:
            cap = min(amplitude, 0.5 / (k * k - 1))
            cos[k - 1] = rng.uniform(-cap, cap)
            sin[k - 1] = rng.uniform(-cap, cap)
        p = FourierSupport(1.0, cos, sin, name="random-fourier")
        if validate_support(p).ok:
            return p
    raise RuntimeError("could not sample a valid domain within the try budget")

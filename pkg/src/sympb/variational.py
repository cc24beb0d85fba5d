"""Discrete Jacobi fields and conjugate points along billiard configurations.

Along a stationary configuration {a_n} the linearization is the three-term
recurrence

    E[n-1] xi[n-1] + D[n] xi[n] + E[n] xi[n+1] = 0

with edge coefficients E[n] = L12(a_n, a_{n+1}) and vertex coefficients
D[n] = L22(a_{n-1}, a_n) + L11(a_n, a_{n+1}). Indices M < N are conjugate
when some nonzero field vanishes at both; since E > 0 (twist), every field
vanishing at M is a multiple of the one seeded with xi[M] = 0, xi[M+1] = 1,
so propagating that single field decides the question.

The same coefficients assemble the symmetric tridiagonal second variation
of the action over the interior points of a segment. Its determinant
vanishes exactly at conjugate pairs and relates to the terminal field by
det = (-1)^m xi[N] prod(E interior), m the matrix size, which tests use as
an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import boundary_derivatives, boundary_point, omega
from .dynamics import Configuration, stationarity_scale

STATIONARITY_TOL = 1e-8
CONJUGACY_TOL = 1e-8


class NonStationaryError(ValueError):
    """The configuration's residuals are too large for variational work."""


@dataclass(frozen=True)
class JacobiField:
    """Field values xi[start .. start + len(values) - 1] along a configuration."""

    start: int
    values: np.ndarray

    def __getitem__(self, n):
        return float(self.values[n - self.start])


@dataclass(frozen=True)
class ConjugateResult:
    conjugate: bool
    witness: JacobiField
    terminal: float


@dataclass(frozen=True)
class SegmentHessian:
    """Second variation of the action over interior points M+1 .. N-1.

    diag[i] = D[M+1+i]; off[i] = E[M+1+i] couples interior points i, i+1.
    """

    start: int
    diag: np.ndarray
    off: np.ndarray

    def dense(self):
        m = self.diag.size
        h = np.diag(self.diag)
        idx = np.arange(m - 1)
        h[idx, idx + 1] = self.off
        h[idx + 1, idx] = self.off
        return h


def _require_stationary(cfg: Configuration, tol=STATIONARITY_TOL):
    if cfg.residuals.size:
        worst = float(np.abs(cfg.residuals).max()) / stationarity_scale(cfg.support)
        if worst > tol:
            raise NonStationaryError(f"max stationarity residual {worst:.3e} > {tol:.0e}")


def recurrence_coeffs(cfg: Configuration):
    """Edge and vertex coefficients (D, E) of the Jacobi recurrence, cached.

    E has one entry per consecutive pair; D is indexed like the angles, with
    D[0] and D[-1] unset (no recurrence is imposed at the ends).
    """
    cached = getattr(cfg, "_jacobi_coeffs", None)
    if cached is not None:
        return cached
    p = cfg.support
    a = cfg.alphas
    g0 = boundary_point(p, a)
    g1, g2 = boundary_derivatives(p, a)
    e = omega(g1[:-1], g1[1:])                # L12(a_n, a_{n+1})
    l11 = omega(g2[:-1], g0[1:])              # L11(a_n, a_{n+1})
    l22 = omega(g0[:-1], g2[1:])              # L22(a_n, a_{n+1})
    d = np.full(a.size, np.nan)
    d[1:-1] = l22[:-1] + l11[1:]
    cfg._jacobi_coeffs = (d, e)
    return d, e


def jacobi_propagate(cfg, xi0, xi1, start=0, stop=None):
    """Forward-solve the recurrence from seeds (xi[start], xi[start+1]).

    Requires a stationary configuration; the twist property keeps every
    leading coefficient E nonzero, so the solve never degenerates.
    """
    _require_stationary(cfg)
    n_last = len(cfg) - 1
    stop = n_last if stop is None else stop
    if not (start + 1 <= stop <= n_last):
        raise ValueError("field range must lie inside the configuration")
    d, e = recurrence_coeffs(cfg)
    values = np.empty(stop - start + 1)
    values[0] = xi0
    values[1] = xi1
    for n in range(start + 1, stop):
        i = n - start
        values[i + 1] = -(d[n] * values[i] + e[n - 1] * values[i - 1]) / e[n]
    return JacobiField(start=start, values=values)


def conjugate_test(cfg, m, n, tol=CONJUGACY_TOL, seed=(0.0, 1.0)):
    """Decide whether indices m < n are conjugate along cfg.

    Propagates the field seeded with (xi[m], xi[m+1]) = seed (must be
    nonzero, default (0, 1)); conjugate iff |xi[n]| < tol * max |xi| over
    the segment. Completeness: any field vanishing at m is proportional to
    this one.
    """
    if n <= m + 1:
        raise ValueError("conjugacy needs a span of at least 2")
    if seed == (0.0, 0.0):
        raise ValueError("the zero field is not a conjugacy witness")
    field = jacobi_propagate(cfg, seed[0], seed[1], start=m, stop=n)
    terminal = float(field.values[-1])
    scale = float(np.abs(field.values).max())
    return ConjugateResult(
        conjugate=abs(terminal) < tol * scale,
        witness=field,
        terminal=terminal,
    )


def segment_hessian(cfg, m, n):
    """Tridiagonal second variation of the action over segment [m, n]."""
    if n <= m + 1:
        raise ValueError("segment needs at least one interior point")
    _require_stationary(cfg)
    if not (0 <= m and n <= len(cfg) - 1):
        raise ValueError("segment outside the configuration")
    d, e = recurrence_coeffs(cfg)
    return SegmentHessian(start=m + 1, diag=d[m + 1:n].copy(), off=e[m + 1:n - 1].copy())


def conjugate_scan(cfg, max_span, tol=CONJUGACY_TOL):
    """All conjugate pairs (m, n) with n - m <= max_span, by sweeping m.

    One propagation per m covers every admissible n, with the running
    maximum of |xi| providing the relative tolerance scale.
    """
    _require_stationary(cfg)
    d, e = recurrence_coeffs(cfg)
    n_last = len(cfg) - 1
    pairs = []
    for m in range(n_last - 1):
        stop = min(m + max_span, n_last)
        xi_prev, xi_cur = 0.0, 1.0
        running = 1.0
        for n in range(m + 1, stop):
            xi_next = -(d[n] * xi_cur + e[n - 1] * xi_prev) / e[n]
            xi_prev, xi_cur = xi_cur, xi_next
            running = max(running, abs(xi_next))
            if abs(xi_next) < tol * running:
                pairs.append((m, n + 1))
    return pairs

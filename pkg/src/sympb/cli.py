"""Command line surface for the billiard laboratory.

Subcommands: validate, map, orbit, portrait, identities, normalize, jacobi,
constants, report. Shared flags --grid, --tol, --json, --out, --seed; the
grid and tolerance defaults can be overridden with the environment variables
SYMPB_GRID and SYMPB_TOL.

Exit codes: 0 ok, 2 domain validation failure, 3 solver non-convergence.
Identical inputs and configuration produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import geometry, normalization, quadrature
from .dynamics import (
    PhasePoint,
    RootBracketError,
    SolverToleranceError,
    inverse_step,
    orbit,
    s_coords,
    step,
    step_many,
)
from .geometry import DomainValidationError, boundary_point, load_domain
from .normalization import NormalizationError, asymptotic_constants
from .quadrature import GridConvergenceError, GridSpec, ReparamSpec
from .variational import conjugate_test

DEFECT_TOL = 1e-6
FMT = "%.17g"


@dataclass(frozen=True)
class RunConfig:
    """Knobs shared by the subcommands; a fixed config fixes the output bytes."""

    grid: GridSpec
    tol: float = DEFECT_TOL
    json_out: bool = False
    out: str | None = None
    seed: int = 0


@dataclass(frozen=True)
class Verdict:
    defect: float
    bialy_sum: float
    label: str
    tol: float


def _env_default(name, cast, fallback):
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    return cast(raw)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sympb",
        description="Symplectic billiards on strictly convex planar domains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, domain=True):
        if domain:
            sp.add_argument("domain", help="domain spec file (JSON)")
        sp.add_argument("--grid", type=int,
                        default=_env_default("SYMPB_GRID", int, 512),
                        help="torus grid size per axis (power of two)")
        sp.add_argument("--tol", type=float,
                        default=_env_default("SYMPB_TOL", float, DEFECT_TOL),
                        help="verdict / reporting tolerance")
        sp.add_argument("--json", action="store_true", help="emit JSON")
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        sp.add_argument("--seed", type=int, default=0,
                        help="seed recorded for reproducibility of sampled diagnostics")

    common(sub.add_parser("validate", help="check positivity and curvature"))

    sp = sub.add_parser("map", help="apply the billiard map once")
    common(sp)
    sp.add_argument("--alpha1", type=float, required=True)
    sp.add_argument("--alpha2", type=float, required=True)
    sp.add_argument("--inverse", action="store_true", help="apply the inverse map")

    sp = sub.add_parser("orbit", help="iterate an orbit, emit CSV n,alpha,x,y,s1")
    common(sp)
    sp.add_argument("--alpha1", type=float, required=True)
    sp.add_argument("--alpha2", type=float, required=True)
    sp.add_argument("--steps", type=int, default=100)

    sp = sub.add_parser("portrait", help="phase portrait CSV alpha1,s1,orbit_id")
    common(sp)
    sp.add_argument("--orbits", type=int, default=20, help="number of initial gaps")
    sp.add_argument("--steps", type=int, default=200, help="points per orbit")

    common(sub.add_parser("identities", help="run the integral identity suite"))

    sp = sub.add_parser("normalize", help="find the normalizing affine parameters")
    common(sp)
    sp.add_argument("--modes", type=int, default=64,
                    help="Fourier modes for the transformed-domain spec")

    sp = sub.add_parser("jacobi", help="conjugacy test along an orbit segment")
    common(sp)
    sp.add_argument("--alpha1", type=float, required=True)
    sp.add_argument("--alpha2", type=float, required=True)
    sp.add_argument("--steps", type=int, default=220)
    sp.add_argument("--start", type=int, default=0, dest="seg_start")
    sp.add_argument("--end", type=int, default=200, dest="seg_end")

    common(sub.add_parser("constants", help="the two asymptotic tail constants"),
           domain=False)

    common(sub.add_parser("report", help="end-to-end integrability report"))

    return parser


def _config(args):
    n1 = args.grid
    return RunConfig(
        grid=GridSpec(n1=n1, n2=n1, n=max(4096, n1)),
        tol=args.tol,
        json_out=args.json,
        out=args.out,
        seed=args.seed,
    )


def _emit(text, cfg):
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_text(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def cmd_validate(args, cfg):
    p = load_domain(args.domain, check=False)
    report = geometry.validate_support(p)
    if cfg.json_out:
        payload = {
            "ok": report.ok,
            "min_support": report.min_support,
            "min_curvature": report.min_curvature,
            "violations": [list(v) for v in report.violations],
        }
        _emit(_json_text(payload), cfg)
    else:
        _emit(str(report) + "\n", cfg)
    return 0 if report.ok else 2


def cmd_map(args, cfg):
    p = load_domain(args.domain)
    q = PhasePoint(args.alpha1, args.alpha2)
    image = inverse_step(p, q) if args.inverse else step(p, q)
    payload = {"alpha1": image.a1, "alpha2": image.a2}
    if cfg.json_out:
        _emit(_json_text(payload), cfg)
    else:
        _emit((FMT + " " + FMT + "\n") % (image.a1, image.a2), cfg)
    return 0


def cmd_orbit(args, cfg):
    p = load_domain(args.domain)
    cfg_orbit = orbit(p, PhasePoint(args.alpha1, args.alpha2), args.steps)
    lines = ["n,alpha,x,y,s1"]
    alphas = cfg_orbit.alphas
    pts = boundary_point(p, alphas)
    for n in range(alphas.size - 1):
        s1 = s_coords(p, PhasePoint(alphas[n], alphas[n + 1])).s1
        lines.append(",".join([
            str(n), FMT % alphas[n], FMT % pts[n, 0], FMT % pts[n, 1], FMT % s1,
        ]))
    _emit("\n".join(lines) + "\n", cfg)
    return 0


def cmd_portrait(args, cfg):
    p = load_domain(args.domain)
    k = args.orbits
    n = args.steps
    gaps = (np.arange(1, k + 1) / (k + 1)) * math.pi
    a1 = np.zeros(k)
    a2 = gaps.copy()
    lines = ["alpha1,s1,orbit_id"]
    rows = []
    for _ in range(n):
        t1 = geometry.boundary_tangent(p, a1)
        x2 = boundary_point(p, a2)
        s1 = geometry.omega(t1, x2)
        rows.append((a1 % (2 * math.pi), s1))
        a1, a2 = a2, step_many(p, a1, a2)
    for oid in range(k):
        for alpha_row, s_row in rows:
            lines.append(",".join([FMT % alpha_row[oid], FMT % s_row[oid], str(oid)]))
    _emit("\n".join(lines) + "\n", cfg)
    return 0


def cmd_identities(args, cfg):
    p = load_domain(args.domain)
    reports = quadrature.identity_suite(p, cfg.grid)
    if cfg.json_out:
        payload = [
            {
                "name": r.name,
                "lhs": r.lhs,
                "rhs": r.rhs,
                "abs_err": r.abs_err,
                "rel_err": r.rel_err,
                "grid": list(r.grid),
            }
            for r in reports
        ]
        _emit(_json_text(payload), cfg)
    else:
        width = max(len(r.name) for r in reports)
        lines = [f"{'identity':<{width}}  {'lhs':>24}  {'rhs':>24}  {'rel_err':>10}  grid"]
        for r in reports:
            lines.append(
                f"{r.name:<{width}}  {r.lhs:>24.15e}  {r.rhs:>24.15e}  "
                f"{r.rel_err:>10.2e}  {'x'.join(str(g) for g in r.grid)}"
            )
        _emit("\n".join(lines) + "\n", cfg)
    return 0


def cmd_normalize(args, cfg):
    p = load_domain(args.domain)
    pt, result = normalization.normalize_domain(p)
    projected = geometry.fourier_projection(pt, n_modes=args.modes)
    payload = {
        "a": result.params.a,
        "sigma": result.params.sigma,
        "residual_fourier2": list(result.residual_fourier2),
        "converged": result.converged,
        "iterations": result.iterations,
        "all_roots": [{"a": r.a, "sigma": r.sigma} for r in result.all_roots],
        "domain": geometry.domain_to_spec(projected),
    }
    _emit(_json_text(payload), cfg)
    return 0


def cmd_jacobi(args, cfg):
    p = load_domain(args.domain)
    steps = max(args.steps, args.seg_end + 1)
    cfg_orbit = orbit(p, PhasePoint(args.alpha1, args.alpha2), steps)
    result = conjugate_test(cfg_orbit, args.seg_start, args.seg_end)
    payload = {
        "segment": [args.seg_start, args.seg_end],
        "conjugate": result.conjugate,
        "xi": [float(v) for v in result.witness.values],
    }
    _emit(_json_text(payload), cfg)
    return 0


def cmd_constants(args, cfg):
    c_val, d_val = asymptotic_constants()
    if cfg.json_out:
        _emit(_json_text({"c": c_val, "d": d_val}), cfg)
    else:
        _emit(("c = " + FMT + "\nd = " + FMT + "\n") % (c_val, d_val), cfg)
    return 0


def run_report(p, cfg: RunConfig):
    """Normalize, evaluate the arc-length integral report, and label.

    CIRCLE-AFFINE when the normalized isoperimetric defect is below
    tolerance (the input is an ellipse up to tolerance). Otherwise the
    positive defect equals, up to the vanished second Fourier terms, the
    full-square no-conjugate-point integral; a positive value certifies
    that conjugate points exist and hence that no full foliation by
    invariant graphs is possible.
    """
    pt, result = normalization.normalize_domain(p)
    rep = quadrature.bialy_report(pt, ReparamSpec.arclength(pt), cfg.grid)
    label = "CIRCLE-AFFINE" if rep.defect < cfg.tol else "NOT-TOTALLY-INTEGRABLE-CERTIFIED"
    verdict = Verdict(defect=rep.defect, bialy_sum=rep.total, label=label, tol=cfg.tol)
    grid = np.arange(cfg.grid.n) * (2 * math.pi / cfg.grid.n)
    vals = np.asarray(pt.eval(grid, 0))
    constancy = float(np.abs(vals - vals.mean()).max())
    detail = {
        "normalization": {
            "a": result.params.a,
            "sigma": result.params.sigma,
            "residual_fourier2": list(result.residual_fourier2),
            "converged": result.converged,
        },
        "normalized_defect": rep.defect,
        "bialy_sum": rep.total,
        "bialy_area_part": rep.area_part,
        "bialy_l12sq_part": rep.l12sq_part,
        "fourier2_of_curvature": [rep.fourier2_cos, rep.fourier2_sin],
        "support_constancy": constancy,
        "label": label,
        "tol": cfg.tol,
    }
    return verdict, detail


def cmd_report(args, cfg):
    p = load_domain(args.domain)
    verdict, detail = run_report(p, cfg)
    if cfg.json_out:
        _emit(_json_text(detail), cfg)
    else:
        lines = [
            f"domain: {p.name}",
            f"normalization: a={detail['normalization']['a']:.12g} "
            f"sigma={detail['normalization']['sigma']:.12g} "
            f"residual={tuple(detail['normalization']['residual_fourier2'])}",
            f"normalized defect: {verdict.defect:.12e}",
            f"no-conjugate-point integral (arc length): {verdict.bialy_sum:.12e}",
            f"verdict: {verdict.label} (tol {verdict.tol:g})",
        ]
        if verdict.label == "NOT-TOTALLY-INTEGRABLE-CERTIFIED":
            lines.append(
                "certificate: positive normalized defect, so the integral "
                "inequality required of conjugate-point-free tables fails; "
                "some configuration carries conjugate points and the phase "
                "space admits no full foliation by invariant graphs."
            )
        _emit("\n".join(lines) + "\n", cfg)
    return 0


_COMMANDS = {
    "validate": cmd_validate,
    "map": cmd_map,
    "orbit": cmd_orbit,
    "portrait": cmd_portrait,
    "identities": cmd_identities,
    "normalize": cmd_normalize,
    "jacobi": cmd_jacobi,
    "constants": cmd_constants,
    "report": cmd_report,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    cfg = _config(args)
    try:
        return _COMMANDS[args.command](args, cfg)
    except DomainValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except (NormalizationError, RootBracketError, SolverToleranceError,
            GridConvergenceError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

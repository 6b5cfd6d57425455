"""Batch front-end: reproduces the built-in studies and emits JSON/CSV reports.

Subcommands
    kobayashi-bounds   two-sided metric bounds on a built-in domain
    holder-failure     disc-radius / boundary-distance ratio divergence table
    ma-pullback        pullback coefficients and MA density for the example map
    canonical          canonical-function solve (envelope or grid oracle)
    extension-check    proper-map constants record and boundary extension values
    geodesic-extend    ball-geodesic boundary values + fits
    peak-function      psh peak function report at a boundary point

Reports are JSON with schema "plurilab/1", embedding the inputs and the
tolerances used; tables are CSV.  All randomness is seeded, so fixed seeds
give byte-identical outputs.  Exit codes: 0 success, 1 invariant violation,
2 usage errors (unknown names, bad flags).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import domains as dm
from .errors import PlurilabError, UnknownNameError

SCHEMA = "plurilab/1"

SUBCOMMANDS = (
    "kobayashi-bounds",
    "holder-failure",
    "ma-pullback",
    "canonical",
    "extension-check",
    "geodesic-extend",
    "peak-function",
)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.complexfloating):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON-serialisable: {type(obj)}")


def write_report(path: Path, payload: dict):
    payload = {"schema": SCHEMA, **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")


def write_csv(path: Path, text: str):
    path.write_text(text)


def write_svg_curve(path: Path, xs, ys, width=640, height=400, margin=40):
    """Minimal SVG polyline of a tabulated curve."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    sx = (width - 2 * margin) / (x1 - x0 if x1 > x0 else 1.0)
    sy = (height - 2 * margin) / (y1 - y0 if y1 > y0 else 1.0)
    pts = " ".join(
        f"{margin + (x - x0) * sx:.2f},{height - margin - (y - y0) * sy:.2f}"
        for x, y in zip(xs, ys)
    )
    path.write_text(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
        f'<rect width="100%" height="100%" fill="white"/>'
        f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>'
        "</svg>\n"
    )


def _parse_config_file(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def _domain_from_args(args):
    params = {}
    if args.n is not None:
        params["n"] = args.n
    if args.radius is not None:
        params["r"] = args.radius
    if args.variant is not None:
        params["variant"] = args.variant
    return dm.make_builtin(args.domain, **params)


def _common_tolerances(args):
    return {"tol": args.tol, "seed": args.seed, "budget": args.budget}


def cmd_kobayashi_bounds(args, out: Path):
    from .kobayashi import graham_bounds, upper_disc

    dom = _domain_from_args(args)
    rng = np.random.default_rng(args.seed)
    pts = dm.sample_interior(dom, args.budget, rng)
    rows = ["z,lower,upper,provenance"]
    results = []
    for z in pts:
        v = rng.standard_normal(dom.n) + 1j * rng.standard_normal(dom.n)
        v /= np.linalg.norm(v)
        kb = graham_bounds(dom, z, v) if dom.convex else upper_disc(dom, z, v)
        if kb.lower > kb.upper:
            return 1, {"error": "bound inversion", "z": list(z)}
        rows.append(f"\"{z.tolist()}\",{kb.lower!r},{kb.upper!r},{kb.provenance}")
        results.append({"lower": kb.lower, "upper": kb.upper, "provenance": kb.provenance})
    write_csv(out / "kobayashi_bounds.csv", "\n".join(rows) + "\n")
    return 0, {"inputs": {"domain": dom.name, **dom.params}, "results": results}


def cmd_holder_failure(args, out: Path):
    from .kobayashi import holder_divergence, omega_phi_sequence

    dom = _domain_from_args(args)
    alphas = [float(a) for a in args.alphas.split(",")]
    nus, zs, us = omega_phi_sequence(n=dom.n, ks=range(2, 2 + args.budget))
    rep = holder_divergence(dom, zs, us, alphas, nu=nus)
    write_csv(out / "divergence.csv", rep.csv())
    if args.svg:
        write_svg_curve(
            out / "divergence.svg", np.log(rep.nu), np.log(rep.ratios[alphas[0]])
        )
    return 0, {
        "inputs": {"domain": dom.name, **dom.params, "alphas": alphas},
        "results": {
            "slopes": {f"{a:g}": rep.slopes[a] for a in rep.alphas},
            "slopes_half_exponent": {f"{a:g}": rep.slopes_half[a] for a in rep.alphas},
            "verdict": {f"{a:g}": rep.verdict[a] for a in rep.alphas},
            "slope_threshold": rep.slope_threshold,
        },
    }


def cmd_ma_pullback(args, out: Path):
    from .mappings import example25, example25_target_field
    from .monge_ampere import ma_density, pullback_matrix

    if args.map != "example25":
        raise UnknownNameError(f"unknown map {args.map!r}")
    F, D, Om = example25()
    b = example25_target_field()
    rng = np.random.default_rng(args.seed)
    pts = dm.sample_interior(D, min(args.budget, 500), rng)
    rows = ["z,a11,a22,a12,density"]
    dens = []
    for z in pts:
        a = pullback_matrix(F, b, z)
        f = ma_density(a)
        dens.append(f)
        rows.append(f"\"{z.tolist()}\",{a[0,0]!r},{a[1,1]!r},{a[0,1]!r},{f!r}")
    write_csv(out / "pullback.csv", "\n".join(rows) + "\n")
    status = 0 if min(dens) >= -1e-10 else 1
    return status, {
        "inputs": {"map": "example25", "points": len(pts)},
        "results": {"min_density": min(dens), "max_density": max(dens)},
    }


def cmd_canonical(args, out: Path):
    from .envelope import canonical_function, estimate_modulus

    dom = _domain_from_args(args)
    if args.solver == "envelope":
        sol = canonical_function(dom, solver="envelope", shape=(args.grid, args.grid))
        sol.validate()
        write_csv(out / "envelope_logx.csv", sol.csv_logx())
        write_csv(out / "envelope_moduli.csv", sol.csv_moduli())
        mod = estimate_modulus(sol, radii=np.geomspace(1e-3, 0.5, 10), seed=args.seed)
        results = {
            "sweeps": sol.levels[0].sweeps,
            "residual": sol.levels[0].residual,
            "modulus_radii": list(sol.modulus_radii),
            "modulus_values": list(sol.modulus_values),
        }
    else:
        sol = canonical_function(dom, solver="oracle", oracle_points=args.grid)
        results = {"sweeps": sol.sweeps, "residual": sol.residual}
    return 0, {"inputs": {"domain": dom.name, **dom.params, "solver": args.solver}, "results": results}


def cmd_extension_check(args, out: Path):
    from .domains import rho_example_Omega_piece
    from .mappings import (
        boundary_extend,
        example25,
        exponent_chain,
        extension_continuity_scan,
        lipschitz_chart_fit,
    )

    if args.map != "example25":
        raise UnknownNameError(f"unknown map {args.map!r}")
    F, D, Om = example25()
    chain = exponent_chain(F, D, Om, rho_example_Omega_piece, seed=args.seed)
    chart = lipschitz_chart_fit(D, np.zeros(2, dtype=complex), seed=args.seed)
    rng = np.random.default_rng(args.seed)
    n_xi = min(args.budget, 50)
    zp = 0.06 * (rng.standard_normal(n_xi) + 1j * rng.standard_normal(n_xi))
    tt = 0.06 * rng.standard_normal(n_xi)
    xis = np.atleast_2d(chart.boundary_point(zp[:, None], tt))
    v0 = chart.inward()
    per_xi = []
    rows = ["xi1,xi2,F1,F2,F3,err"]
    for xi in xis:
        vals, err = boundary_extend(F, xi, v0, t_prime=0.05)
        per_xi.append({"xi": list(xi), "F": list(vals), "quad_err": err})
        rows.append(
            f"{xi[0]!r},{xi[1]!r},{vals[0]!r},{vals[1]!r},{vals[2]!r},{err!r}"
        )
    write_csv(out / "extension_values.csv", "\n".join(rows) + "\n")
    scan = extension_continuity_scan(F, chart, eps_list=(0.3, 0.1, 0.03), seed=args.seed)
    return 0, {
        "inputs": {"map": "example25", "n_xi": n_xi},
        "results": {
            "constants": F.constants,
            "chart": {"C": chart.C, "p": list(chart.p)},
            "scan": scan,
            "extensions": per_xi,
        },
    }


def cmd_geodesic_extend(args, out: Path):
    from .geodesics import (
        RadialMajorant,
        ball_geodesic,
        dini_check,
        hl_extend,
        mercer_fit,
    )
    from .kobayashi import ModulusOfContinuity

    dom = _domain_from_args(args)
    if dom.name != "ball":
        raise UnknownNameError("geodesic-extend runs on the ball builtin")
    rng = np.random.default_rng(args.seed)
    p = 0.3 * (rng.standard_normal(dom.n) + 1j * rng.standard_normal(dom.n))
    q = 0.3 * (rng.standard_normal(dom.n) + 1j * rng.standard_normal(dom.n))
    disc = ball_geodesic(p, q)
    radii = 1.0 - np.geomspace(1e-3, 0.5, 32)
    fit = mercer_fit(disc, dom, radii)
    rows = ["theta," + ",".join(f"psi{j+1}_re,psi{j+1}_im" for j in range(dom.n))]
    angles = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    bvals = disc.psi(np.exp(1j * angles))
    for th, row in zip(angles, bvals):
        cells = [repr(float(th))]
        for c in row:
            cells += [repr(float(c.real)), repr(float(c.imag))]
        rows.append(",".join(cells))
    write_csv(out / "geodesic_boundary.csv", "\n".join(rows) + "\n")
    dini = dini_check(ModulusOfContinuity("power", C=1.0, alpha=1.0), C2=fit.C2, s=1.0 / fit.beta)
    return 0, {
        "inputs": {"domain": dom.name, **dom.params},
        "results": {
            "mercer": {"C1": fit.C1, "C2": fit.C2, "beta": fit.beta},
            "dini_power1": {"passes": dini.passes, "integral": dini.integral},
        },
    }


def cmd_peak_function(args, out: Path):
    from .peaks import peak_function

    dom = _domain_from_args(args)
    p = np.zeros(dom.n, dtype=complex)
    p[0] = dom.bounding_radius  # boundary point on the first axis for the ball
    if dom.name != "ball":
        raise UnknownNameError("peak-function CLI runs on the ball builtin; use the API for others")
    pk = peak_function(dom, p, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    pts = dm.sample_interior(dom, min(args.budget, 400), rng)
    uvals = pk.u(pts)
    rows = ["z,u"]
    for z, u in zip(pts, uvals):
        rows.append(f"\"{z.tolist()}\",{u!r}")
    write_csv(out / "peak_samples.csv", "\n".join(rows) + "\n")
    status = 0 if np.max(uvals) < 0 else 1
    return status, {
        "inputs": {"domain": dom.name, **dom.params, "p": list(p)},
        "results": {
            "u_at_p": pk.report["u_at_p"],
            "map_quality": pk.report["map_quality"],
            "max_u_interior": float(np.max(uvals)),
        },
    }


_HANDLERS = {
    "kobayashi-bounds": cmd_kobayashi_bounds,
    "holder-failure": cmd_holder_failure,
    "ma-pullback": cmd_ma_pullback,
    "canonical": cmd_canonical,
    "extension-check": cmd_extension_check,
    "geodesic-extend": cmd_geodesic_extend,
    "peak-function": cmd_peak_function,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="plurilab", description=__doc__)
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--domain", default="ball")
    ap.add_argument("--map", default="example25")
    ap.add_argument("--n", type=int, default=None)
    ap.add_argument("--radius", type=float, default=None)
    ap.add_argument("--variant", default=None)
    ap.add_argument("--alphas", default="0.5,1")
    ap.add_argument("--solver", default="envelope", choices=("envelope", "oracle"))
    ap.add_argument("--grid", type=int, default=129)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget", type=int, default=12)
    ap.add_argument("--tol", type=float, default=1e-8)
    ap.add_argument("--out", default="plurilab_out")
    ap.add_argument("--svg", action="store_true")
    ap.add_argument("--config", default=None, help="key=value file overriding flags")
    return ap


def run(subcommand, args):
    """Dispatch one subcommand; returns the process exit status."""
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    handler = _HANDLERS[subcommand]
    try:
        status, payload = handler(args, out)
    except UnknownNameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PlurilabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    payload.setdefault("inputs", {})
    payload["subcommand"] = subcommand
    payload["tolerances"] = _common_tolerances(args)
    write_report(out / "report.json", payload)
    return status


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if args.config:
        overrides = _parse_config_file(args.config)
        for key, val in overrides.items():
            if hasattr(args, key):
                cur = getattr(args, key)
                caster = type(cur) if cur is not None else str
                setattr(args, key, caster(val))
    try:
        return run(args.subcommand, args)
    except UnknownNameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

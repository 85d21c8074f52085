"""Command-line front end: ``lengyel-epstein <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or parameter error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import cycles as cyc
from . import hopf, infinity, verify
from .integrate import IntegratorConfig, integrate
from .model import (A1, A2, CURVES_MEET_A, Params, Region, basin_b, classify_equilibrium,
                    dulac_certificate, dulac_majorant, equilibrium, hopf_b, region_membership)
from .svg import Canvas

BANNER = f"lengyel-epstein {__version__}"


class UsageError(Exception):
    pass


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(verify._clean(obj), indent=2, sort_keys=True) + "\n")


def _params(args) -> Params:
    try:
        return Params(args.a, args.b)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _cfg(args) -> IntegratorConfig:
    try:
        return IntegratorConfig(rel_tol=args.rel_tol, abs_tol=args.abs_tol, max_time=args.t_max,
                                max_steps=args.max_steps, r_escape=args.r_escape, tol_conv=args.tol_conv)
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_simulate(args) -> int:
    p = _params(args)
    orb = integrate(p, (args.x0, args.y0), _cfg(args))
    orb.to_csv(args.out / "orbit.csv")
    _dump({"schema": 1, "params": [p.a, p.b], "initial": [args.x0, args.y0], "fate": orb.fate.value,
           "t_end": orb.t_end, "final_state": list(orb.final_state),
           "escape_radius_hit": orb.escape_radius_hit, "overflow": orb.overflow,
           "n_steps": orb.n_steps, "n_rejected": orb.n_rejected}, args.out / "fate.json")
    print(f"{orb.fate.value} t_end={orb.t_end:.6g} final=({orb.final_state.x:.10g}, {orb.final_state.y:.10g})")
    return 0


def _default_window(p: Params, found):
    if found:
        xy = np.vstack([c.orbit[:, 1:] for c in found if len(c.orbit)])
        x0, y0 = xy.min(axis=0)
        x1, y1 = xy.max(axis=0)
        px, py = 0.6 * (x1 - x0), 0.6 * (y1 - y0)
        return max(0.0, x0 - px), x1 + px, y0 - py, y1 + py
    xp, yp = equilibrium(p)
    return 0.0, 3.0 * xp + 2.0, 0.0, 2.0 * yp + 2.0


def cmd_portrait(args) -> int:
    p = _params(args)
    found = cyc.find_cycles_default(p, with_orbits=True)
    window = tuple(args.window) if args.window else _default_window(p, found)
    rep = classify_equilibrium(p)
    cv = Canvas(window, title=f"a={p.a:g}, b={p.b:g}: {rep.kind.value}, {len(found)} cycle(s)")
    cv.axes()
    x0, x1, y0, y1 = window
    # orbits attracted to a cycle would otherwise retrace it hundreds of times
    t_max = args.t_max or (6.0 * max(c.period for c in found) if found else 20.0)
    cfg = IntegratorConfig(max_time=t_max, rel_tol=1e-9, abs_tol=1e-12)
    n = max(1, args.n_orbits)
    # starts spread along the window's edges
    ts = (np.arange(n) + 0.5) / n
    for t in ts:
        u = 4.0 * t
        side, f = int(u), u - int(u)
        sx, sy = [(x0 + f * (x1 - x0), y0), (x1, y0 + f * (y1 - y0)),
                  (x1 - f * (x1 - x0), y1), (x0, y1 - f * (y1 - y0))][side]
        orb = integrate(p, (max(sx, 1e-9), sy), cfg)
        cv.polyline(orb.xy, stroke="#777", width=0.8, opacity=0.8)
    for c in found:
        closed = np.vstack([c.orbit[:, 1:], c.orbit[:1, 1:]])
        if c.stability is cyc.Stability.UNSTABLE:
            cv.polyline(closed, stroke="#c0392b", width=2.0, dash="6,4")
        else:
            cv.polyline(closed, stroke="#1f4e9c", width=2.0)
    xp, yp = equilibrium(p)
    cv.circle(xp, yp, 5, fill="black" if rep.stable else "white", stroke="black")
    cv.save(args.out / "portrait.svg", BANNER)
    print(f"portrait.svg: {len(found)} cycle(s), equilibrium {rep.kind.value}")
    return 0


_REGION_COLORS = {
    Region.IN_A: "#cfe8cf", Region.IN_B_NOT_A: "#f6e7b0", Region.ON_H_MINUS: "#1f4e9c",
    Region.ON_H_PLUS: "#c0392b", Region.AT_BAUTIN: "#000000", Region.IN_D: "#e79c4b",
    Region.UNSTABLE_OUTSIDE_D: "#f3c6c6", Region.ON_S_APPROX: "#7b3294",
}


def _label_job(job):
    a, b, tol, with_cycles = job
    r = region_membership(Params(a, b), tol_curve=tol, resolve_cycles=with_cycles)
    return r.label.value, r.d_status


def cmd_regions(args) -> int:
    (a0, a1), (b0, b1) = args.a_range, args.b_range
    if not (0 < a0 < a1 and 0 < b0 < b1):
        raise UsageError("ranges must be positive and increasing")
    na, nb = args.resolution
    if na < 1 or nb < 1:
        raise UsageError("resolution must be positive")
    av = a0 + (np.arange(na) + 0.5) * (a1 - a0) / na
    bv = b0 + (np.arange(nb) + 0.5) * (b1 - b0) / nb
    jobs = [(float(a), float(b), args.tol_curve, args.with_cycles) for b in bv for a in av]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as ex:
            res = list(ex.map(_label_job, jobs, chunksize=16))
    else:
        res = [_label_job(j) for j in jobs]
    labels = [[res[j * na + i][0] for i in range(na)] for j in range(nb)]
    unresolved = sum(1 for _, s in res if s == "unresolved")

    s_rows = []
    if args.with_cycles:
        for a in args.s_samples:
            if a <= hopf.bautin_a():
                continue
            try:
                lo, hi = cyc.semistable_bracket(a, args.tol_b)
                s_rows.append({"a": a, "b_lo": lo, "b_hi": hi})
            except cyc.BracketFailure as e:
                s_rows.append({"a": a, "error": str(e)})
    probes = [{"a": a, "b": b, "label": _label_job((a, b, args.tol_curve, True))[0]}
              for a, b in (args.probe or [(24.712, 13.85)])]
    aB = hopf.bautin_a()
    doc = {
        "schema": 1, "a": list(av), "b": list(bv), "labels": labels, "unresolved_pixels": unresolved,
        "probes": probes,
        "anchors": {"a1": A1, "a2": A2}, "intersection": [CURVES_MEET_A, hopf_b(CURVES_MEET_A)],
        "bautin": [aB, hopf_b(aB)], "semistable": s_rows,
    }
    _dump(doc, args.out / "regions.json")

    cv = Canvas((a0, a1, b0, b1), title="parameter plane (a, b)")
    da, db = (a1 - a0) / na, (b1 - b0) / nb
    for j, b in enumerate(bv):
        for i, a in enumerate(av):
            cv.rect(a - da / 2, b - db / 2, da, db, _REGION_COLORS[Region(labels[j][i])])
    aa = np.linspace(max(A2, a0), a1, 400)
    cv.polyline(np.column_stack([aa, hopf_b(aa)]), stroke="#1f4e9c", width=1.5)
    aa = np.linspace(max(A1, a0), a1, 400)
    cv.polyline(np.column_stack([aa, basin_b(aa)]), stroke="#2d7f2d", width=1.5)
    cv.circle(CURVES_MEET_A, hopf_b(CURVES_MEET_A), 4, fill="black")
    cv.text(CURVES_MEET_A, hopf_b(CURVES_MEET_A), " I", size=12)
    cv.circle(aB, hopf_b(aB), 4, fill="black")
    cv.text(aB, hopf_b(aB), " B", size=12)
    for a, lbl in ((A1, "a1"), (A2, "a2")):
        if a0 <= a <= a1:
            cv.polyline([[a, b0], [a, b0 + 0.03 * (b1 - b0)]], stroke="black")
            cv.text(a, b0, lbl, size=11, anchor="middle")
    pts = [(r["a"], 0.5 * (r["b_lo"] + r["b_hi"])) for r in s_rows if "b_lo" in r]
    if len(pts) >= 2:
        cv.polyline(pts, stroke="#7b3294", width=1.5, dash="4,3")
    cv.axes("a", "b")
    cv.save(args.out / "regions.svg", BANNER)
    print(f"regions.json: {na}x{nb} pixels, {unresolved} unresolved, {len(s_rows)} S samples")
    return 0


def _disk_point(direction):
    d = np.asarray(direction, dtype=float)
    return d / np.hypot(*d)


def cmd_infinity(args) -> int:
    p = _params(args)
    inf_eq = infinity.infinite_equilibria(p)
    circ = infinity.circle_equilibria(p)
    doc = {
        "schema": 1, "params": [p.a, p.b],
        "infinite_equilibria": [{
            "label": e.label, "chart": e.chart.value, "coords": list(e.coords), "kind": e.kind.value,
            "jacobian": e.jacobian.tolist() if e.jacobian is not None else None,
            "eigenvalues": sorted(np.linalg.eigvals(e.jacobian).real.tolist()) if e.jacobian is not None else None,
            "sector_structure": e.sector_structure} for e in inf_eq],
        "circle_equilibria": [{
            "theta": c.theta, "jacobian_at_r0": c.jacobian_at_r0.tolist(), "classification": c.classification.value,
            "semi_hyp_data": None if c.semi_hyp_data is None else
            {"lambda": c.semi_hyp_data.lam, "m": c.semi_hyp_data.m, "a_m": c.semi_hyp_data.a_m},
            "lambda_sign_flag": c.lambda_sign_flag, **c.notes} for c in circ],
    }
    _dump(doc, args.out / "infinity.json")

    cv = Canvas((-1.1, 1.1, -1.1, 1.1), width=700, height=700, title=f"Poincare disk, a={p.a:g}, b={p.b:g}")
    th = np.linspace(0, 2 * np.pi, 361)
    cv.polyline(np.column_stack([np.cos(th), np.sin(th)]), stroke="black", width=1.5)
    cfg = IntegratorConfig(max_time=args.t_max, rel_tol=1e-9, abs_tol=1e-12)
    rng = np.random.default_rng(args.seed)
    starts = [(-1.0, -10.0), (-5.0, -50.0), (-10.0, -1.0), (-0.5, -100.0)]
    starts += [tuple(v) for v in rng.uniform(-20, 20, (args.n_orbits, 2))]
    for s in starts:
        orb = integrate(p, s, cfg)
        cv.polyline(infinity.disk_projection(orb.xy), stroke="#777", width=0.8)
    for lbl, d in (("I1", (1.0, -p.b)), ("I2", (-1.0, p.b)), ("I3", (0.0, 1.0)), ("I4", (0.0, -1.0))):
        x, y = _disk_point(d)
        cv.circle(x, y, 5, fill="#c0392b")
        cv.text(1.05 * x, 1.05 * y, lbl, size=12, anchor="middle")
    xp, yp = infinity.disk_projection(equilibrium(p))
    cv.circle(xp, yp, 4, fill="black")
    cv.save(args.out / "disk.svg", BANNER)
    print(f"infinity.json: {len(inf_eq)} infinite and {len(circ)} circle equilibria")
    return 0


def cmd_hopf(args) -> int:
    lo, hi = args.a_range
    try:
        rows = hopf.hopf_scan((lo, hi), args.n, workers=args.workers)
    except ValueError as e:
        raise UsageError(str(e)) from None
    hopf.write_hopf_csv(rows, args.out / "hopf_scan.csv")
    changes = hopf.sign_changes(rows)
    roots = [hopf.l1_root(*c) for c in changes]
    aB = hopf.bautin_a()
    doc = {"schema": 1, "a_range": [lo, hi], "n": args.n, "bautin_closed_form": aB,
           "l1_sign_changes": [list(c) for c in changes], "l1_roots": roots,
           "L2_at_bautin": hopf.lyapunov_l2(aB)}
    _dump(doc, args.out / "hopf.json")
    print(f"hopf_scan.csv: {len(rows)} rows; L1 roots {['%.8f' % r for r in roots]}; a_B = {aB:.8f}")
    return 0


def cmd_cycles(args) -> int:
    p = _params(args)
    sec = cyc.Section.vertical(p) if args.section == "vertical" else cyc.Section.horizontal(p)
    if args.x_max is None:
        found = cyc.find_cycles_default(p, n_seed=args.n_seed, section=sec, with_orbits=True)
    else:
        found = cyc.find_cycles(p, args.x_max, args.n_seed, section=sec)
    for k, c in enumerate(found, 1):
        with open(args.out / f"cycle_{k}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "y"])
            for row in c.orbit:
                w.writerow([repr(float(v)) for v in row])
    doc = {"schema": 1, "params": [p.a, p.b], "section": args.section,
           "cycles": [dict(c.to_dict(), floquet_divergence=c.floquet_divergence) for c in found]}
    if args.semistable:
        try:
            lo, hi = cyc.semistable_bracket(p.a, args.tol_b)
            doc["semistable"] = {"b_lo": lo, "b_hi": hi, "b_S": 0.5 * (lo + hi)}
        except (ValueError, cyc.BracketFailure) as e:
            doc["semistable"] = {"error": str(e)}
    _dump(doc, args.out / "cycles.json")
    for c in found:
        print(f"cycle at {c.section_x:.10g}: period {c.period:.6g}, multiplier {c.floquet:.8g}, {c.stability.value}")
    if not found:
        print("no cycles")
    return 0


def cmd_dulac(args) -> int:
    p = _params(args)
    try:
        cert = dulac_certificate(p, args.x_max, args.n_grid)
    except ValueError as e:
        raise UsageError(str(e)) from None
    c = float(np.cbrt(p.a))
    _dump({"schema": 1, "params": [p.a, p.b], "holds": cert.holds, "worst_x": cert.worst_x,
           "worst_value": cert.worst_value, "grid": list(cert.grid), "majorant_peak_x": c,
           "majorant_at_peak": float(dulac_majorant(p.a, c))}, args.out / "dulac.json")
    print(f"holds={cert.holds} worst f={cert.worst_value:.6g} at x={cert.worst_x:.6g}")
    return 0


def cmd_verify(args) -> int:
    rep = verify.run_suite(args.suite, args.seed)
    (args.out / "verify.json").write_text(verify.to_json(rep))
    for c in rep["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} [{c['id']}] {c['title']}")
    return 0 if rep["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lengyel-epstein", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=BANNER)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, params=True):
        if params:
            sp.add_argument("-a", type=float, required=True)
            sp.add_argument("-b", type=float, required=True)
        sp.add_argument("--out", type=Path, default=Path("."), help="output directory")

    def tolerances(sp, t_max):
        d = IntegratorConfig()
        sp.add_argument("--t-max", type=float, default=t_max)
        sp.add_argument("--rel-tol", type=float, default=d.rel_tol)
        sp.add_argument("--abs-tol", type=float, default=d.abs_tol)
        sp.add_argument("--max-steps", type=int, default=d.max_steps)
        sp.add_argument("--r-escape", type=float, default=d.r_escape)
        sp.add_argument("--tol-conv", type=float, default=d.tol_conv)

    sp = sub.add_parser("simulate", help="integrate one orbit")
    common(sp)
    sp.add_argument("--x0", type=float, required=True)
    sp.add_argument("--y0", type=float, required=True)
    tolerances(sp, IntegratorConfig().max_time)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("portrait", help="phase portrait with detected cycles")
    common(sp)
    sp.add_argument("--window", type=float, nargs=4, metavar=("X0", "X1", "Y0", "Y1"))
    sp.add_argument("--n-orbits", type=int, default=16)
    sp.add_argument("--t-max", type=float, default=None,
                    help="orbit length (default: 6 periods of the outer cycle, else 20)")
    sp.set_defaults(func=cmd_portrait)

    sp = sub.add_parser("regions", help="parameter-plane map")
    common(sp, params=False)
    sp.add_argument("--a-range", type=float, nargs=2, default=(0.5, 30.0))
    sp.add_argument("--b-range", type=float, nargs=2, default=(0.1, 20.0))
    sp.add_argument("--resolution", type=int, nargs=2, default=(60, 40), metavar=("NA", "NB"))
    sp.add_argument("--with-cycles", action="store_true")
    sp.add_argument("--s-samples", type=float, nargs="*", default=(19.0, 20.0, 22.0, 24.712, 27.0, 30.0))
    sp.add_argument("--tol-b", type=float, default=1e-4)
    sp.add_argument("--tol-curve", type=float, default=1e-9)
    sp.add_argument("--probe", type=float, nargs=2, action="append", metavar=("A", "B"),
                    help="also label this exact (a, b) (repeatable); default 24.712 13.85")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_regions)

    sp = sub.add_parser("infinity", help="equilibria at infinity and the Poincare disk")
    common(sp)
    sp.add_argument("--n-orbits", type=int, default=12)
    sp.add_argument("--t-max", type=float, default=50.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_infinity)

    sp = sub.add_parser("hopf", help="Lyapunov coefficients along the Hopf curve")
    common(sp, params=False)
    sp.add_argument("--a-range", type=float, nargs=2, default=(7.0, 30.0))
    sp.add_argument("-n", type=int, default=100)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_hopf)

    sp = sub.add_parser("cycles", help="limit cycles from the return map")
    common(sp)
    sp.add_argument("--n-seed", type=int, default=80)
    sp.add_argument("--x-max", type=float, default=None)
    sp.add_argument("--section", choices=("horizontal", "vertical"), default="horizontal")
    sp.add_argument("--semistable", action="store_true", help="also bracket b on the curve S at this a")
    sp.add_argument("--tol-b", type=float, default=1e-4)
    sp.set_defaults(func=cmd_cycles)

    sp = sub.add_parser("dulac", help="Bendixson-Dulac certificate")
    common(sp)
    sp.add_argument("--x-max", type=float, default=None)
    sp.add_argument("--n-grid", type=int, default=10_000)
    sp.set_defaults(func=cmd_dulac)

    sp = sub.add_parser("verify", help="run an acceptance suite")
    common(sp, params=False)
    sp.add_argument("--suite", choices=verify.SUITES, default="all")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

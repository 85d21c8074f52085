"""Numbered acceptance checks, grouped into suites for ``lengyel-epstein verify``.

Each check returns ``(passed, values)``; ``values`` holds the measured
quantities.  Random samples come from ``default_rng([seed, criterion])`` so a
check draws the same numbers whichever suite runs it.  Nothing time-dependent
goes into the report, so equal seeds give byte-identical JSON.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import cycles as cyc
from . import hopf, infinity
from .integrate import IntegratorConfig, basin_scan, escape_search, verify_invariance
from .model import (A1, A2, CURVES_MEET_A, Params, basin_b, classify_equilibrium, det_at_equilibrium,
                    dulac_certificate, dulac_majorant, equilibrium, hopf_b, in_set_a, jacobian)

SCHEMA = 1


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def _rel(x, ref):
    return abs(x - ref) / max(abs(ref), 1e-300)


def check_hopf_curve(rng):
    a = rng.uniform(A2, 50.0, 200)
    a = a[a > A2]
    tr, det_err = [], []
    for v in a:
        p = Params(v, hopf_b(v))
        J = jacobian(p, equilibrium(p))
        tr.append(abs(J[0, 0] + J[1, 1]))
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        det_err.append(_rel(det, det_at_equilibrium(p)))
    vals = {"n": len(a), "max_abs_trace": max(tr), "max_rel_det_err": max(det_err)}
    return max(tr) < 1e-10 and max(det_err) <= 1e-12, vals


def check_intersection(rng):
    a = CURVES_MEET_A
    target = 2.0 * math.sqrt(5.0)
    eh, ea = abs(hopf_b(a) - target), abs(basin_b(a) - target)
    return eh <= 1e-12 and ea <= 1e-12, {"hopf_b_err": eh, "basin_b_err": ea}


def check_bautin(rng):
    rows = hopf.hopf_scan((7.0, 30.0), 100)
    changes = hopf.sign_changes(rows)
    vals = {"sign_changes": len(changes)}
    ok = len(changes) == 1
    if ok:
        root = hopf.l1_root(*changes[0])
        vals["root"] = root
        vals["rel_err"] = _rel(root, hopf.bautin_a())
        ok = vals["rel_err"] <= 1e-4
    samples = rng.uniform(A2, 50.0, 100)
    mism = [float(v) for v in samples
            if abs(v - hopf.bautin_a()) > 1e-6 and
            np.sign(hopf.first_lyapunov(v)) != np.sign(hopf.l1_sign_poly(v))]
    vals["sign_mismatches"] = len(mism)
    return ok and not mism, vals


def check_l2(rng):
    aB = hopf.bautin_a()
    l2 = hopf.lyapunov_l2(aB)
    l2s = hopf.lyapunov_l2(aB, scale=3.7)
    fit = hopf.displacement_curvature(aB)
    vals = {"L2": l2, "L2_rescaled": l2s, "curvature_leading": fit.leading,
            "curvature_coefficients": list(fit.coefficients)}
    return l2 < 0 and l2s < 0 and fit.sign == -1, vals


def check_two_cycles(rng):
    cs = cyc.find_cycles_default(Params(24.712, 13.85))
    vals = {"count": len(cs), "cycles": [
        {"section_x": c.section_x, "floquet": c.floquet, "floquet_divergence": c.floquet_divergence,
         "rel_diff": _rel(c.floquet_divergence, c.floquet)} for c in cs]}
    ok = len(cs) == 2 and cs[0].floquet > 1.0 and cs[1].floquet < 1.0
    ok = ok and all(_rel(c.floquet_divergence, c.floquet) <= 1e-3 for c in cs)
    return ok, vals


def check_generic_hopf(rng):
    below = cyc.find_cycles_default(Params(10.0, 3.4))
    one_stable = len(below) == 1 and below[0].stability is cyc.Stability.STABLE
    above = cyc.find_cycles_default(Params(20.0, 10.8))
    two_above = len(above) == 2
    amps = []
    for d in (0.025, 0.05, 0.1):
        cs = cyc.find_cycles_default(Params(10.0, hopf_b(10.0) - d))
        amps.append(cs[-1].offset if cs else float("nan"))
    ratios = [amps[i + 1] / amps[i] / math.sqrt(2.0) for i in range(2)]
    sqrt_law = all(0.5 <= r <= 2.0 for r in ratios)
    vals = {"cycles_10_3.4": len(below), "stable_10_3.4": one_stable,
            "cycles_20_10.8": len(above), "amplitudes": amps, "ratio_over_sqrt2": ratios,
            "sub": {"one_stable_below_Hminus": one_stable, "two_cycles_at_20_10.8": two_above,
                    "sqrt_law": sqrt_law}}
    return one_stable and two_above and sqrt_law, vals


def check_semistable(rng):
    tol_b = 1e-3
    rows, gaps, ok = [], [], True
    for a in (24.712, 20.0, 19.0):
        lo, hi = cyc.semistable_bracket(a, tol_b)
        bs = 0.5 * (lo + hi)
        below = cyc.count_cycles(Params(a, bs - tol_b))
        above = cyc.count_cycles(Params(a, bs + tol_b))
        gaps.append(bs - hopf_b(a))
        good = bs > hopf_b(a) and below == 2 and above == 0
        ok = ok and good
        rows.append({"a": a, "b_S": bs, "bracket": [lo, hi], "gap": bs - hopf_b(a),
                     "count_below": below, "count_above": above})
    ok = ok and rows[0]["b_S"] > 13.85 and gaps[0] > gaps[1] > gaps[2]
    return ok, {"rows": rows}


def check_basin(rng):
    out, ok = [], True
    for a, b in ((5.0, 1.0), (27.0, 19.0), (3.0, 0.5)):
        p = Params(a, b)
        r = basin_scan(p, (0.1, 10.0 * a), (-50.0, 50.0), 10, 10)
        good = r.converged == r.total == 100 and r.max_final_distance <= 1e-6
        ok = ok and good
        out.append({"a": a, "b": b, "converged": r.converged, "total": r.total,
                    "max_final_distance": r.max_final_distance})
    return ok, {"scans": out}


def check_escape(rng):
    pts = rng.uniform(0.0, 30.0, (50, 2))
    failures, n_stable = [], 0
    for a, b in pts:
        a, b = max(a, 1e-6), max(b, 1e-6)
        p = Params(a, b)
        n_stable += classify_equilibrium(p).stable
        try:
            _, orb = escape_search(p)
            if not orb.escape_radius_hit >= 1e6:
                failures.append([a, b])
        except Exception:
            failures.append([a, b])
    return not failures and n_stable > 0, {"n": len(pts), "failures": failures, "n_stable_equilibrium": n_stable}


def check_dulac(rng):
    bad = []
    for _ in range(1000):
        a = rng.uniform(0.01, 50.0)
        lo = 0.0 if a <= A1 else basin_b(a)
        b = lo + rng.uniform(1e-6, 30.0)
        p = Params(a, b)
        if in_set_a(p) and not dulac_certificate(p).holds:
            bad.append([a, b])
    a = rng.uniform(0.01, 50.0, 100)
    g = np.abs(dulac_majorant(a, np.cbrt(a)))
    return not bad and g.max() <= 1e-12, {"failures": bad, "max_abs_g_at_peak": g.max()}


def _push_err(p, chart, x, y):
    u, v = chart.to_chart(x, y)
    c = np.array(chart.field(p, u, v))
    r = v * v * np.array(infinity.pushforward(p, chart, x, y))
    return float(np.abs(c - r).max() / np.abs(r).max())


def check_compactification(rng):
    worst = {}
    for chart in infinity.Chart:
        errs = []
        for _ in range(1000):
            a, b = rng.uniform(0.1, 30.0, 2)
            s, t = rng.uniform(0.1, 10.0, 2) * rng.choice([-1.0, 1.0], 2)
            if chart is infinity.Chart.U1:
                s = abs(s)
            elif chart is infinity.Chart.V1:
                s = -abs(s)
            elif chart is infinity.Chart.U2:
                t = abs(t)
            else:
                t = -abs(t)
            errs.append(_push_err(Params(a, b), chart, s, t))
        worst[chart.value] = max(errs)
    # eigenvalues at I1 from complex-step derivatives of the U1 field
    ev_err = 0.0
    for _ in range(20):
        p = Params(*rng.uniform(0.1, 30.0, 2))
        h = 1e-30
        J = np.array([np.imag(infinity.chart_u1_field(p, -p.b + 1j * h, 0.0)),
                      np.imag(infinity.chart_u1_field(p, -p.b, 1j * h))]).T / h
        ev = np.linalg.eigvals(J)
        ev_err = max(ev_err, float(np.abs(ev - 1.0).max()))
    bup = 0.0
    for _ in range(1000):
        p = Params(*rng.uniform(0.1, 30.0, 2))
        r = rng.uniform(1e-4, 1e-2)
        th = rng.uniform(0.0, 2 * math.pi)
        lhs = np.array(infinity.blowup_pushforward(p, r, th))
        rhs = (1.0 + math.sin(th) ** 2) / r ** 2 * np.array(
            infinity.chart_u2_field(p, r * math.cos(th), r * r * math.sin(th)))
        bup = max(bup, float(np.abs(lhs - rhs).max() / np.abs(rhs).max()))
    ok = max(worst.values()) <= 1e-10 and ev_err <= 1e-10 and bup <= 1e-8
    return ok, {"pushforward_rel_err": worst, "I1_eigenvalue_err": ev_err, "blowup_rel_err": bup}


def check_circle(rng):
    roots = infinity.circle_roots()
    ok = len(roots) == 6
    root_err = max(abs(r - t) for r, t in zip(roots, infinity.CIRCLE_ANGLES)) if ok else float("inf")
    resid = max(abs(float(infinity.circle_polynomial(t))) for t in roots)
    ok = ok and root_err <= 1e-12 and resid <= 1e-12
    s5 = math.sqrt(5.0)
    fd_err, mat_err, red_err, sn_signs = 0.0, 0.0, 0.0, True
    for _ in range(10):
        a, b = rng.uniform(0.1, 30.0, 2)
        p = Params(a, b)
        f = lambda r, t: infinity.blowup_field(p, r, t)
        expect = {0.0: [[-1, 0], [0, 2]], math.pi: [[-1, 0], [0, 2]],
                  math.pi / 2: [[0, 0], [0, -8]], 3 * math.pi / 2: [[0, 0], [0, 8]]}
        sn = [[0, 0], [(152 - 68 * s5) * (2 * a + 5 * b), 320 - 144 * s5]]
        expect[math.pi + infinity.THETA0] = sn
        expect[2 * math.pi - infinity.THETA0] = sn
        for t, m in expect.items():
            J = infinity.blowup_jacobian(p, t)
            mat_err = max(mat_err, float(np.abs(J - np.array(m, dtype=float)).max()))
            fd_err = max(fd_err, float(np.abs(infinity.numeric_jacobian(f, (0.0, t)) - J).max()))
        d = infinity.semi_hyperbolic_reduce(f, (0.0, math.pi / 2))
        red_err = max(red_err, abs(d.lam + 8), abs(d.m - 5), _rel(d.a_m, a * b / 4))
        d = infinity.semi_hyperbolic_reduce(f, (0.0, 3 * math.pi / 2))
        red_err = max(red_err, abs(d.lam - 8), abs(d.m - 5), _rel(d.a_m, -a * b / 4))
        d1 = infinity.semi_hyperbolic_reduce(f, (0.0, math.pi + infinity.THETA0))
        d2 = infinity.semi_hyperbolic_reduce(f, (0.0, 2 * math.pi - infinity.THETA0))
        sn_signs = sn_signs and d1.m == 2 and d1.a_m > 0 and d2.m == 2 and d2.a_m < 0
    ok = ok and mat_err <= 1e-6 and fd_err <= 1e-6 and red_err <= 1e-6 and sn_signs
    return ok, {"roots": roots, "root_err": root_err, "residual": resid, "analytic_vs_expected": mat_err,
                "analytic_vs_fd": fd_err, "reduction_err": red_err, "saddle_node_signs": sn_signs}


def check_invariance(rng):
    viol = 0
    for ab in ((5.0, 1.0), (20.0, 1.0)):
        rep = verify_invariance(Params(*ab), 20, seed=int(rng.integers(1 << 31)),
                                initial=[(0.01, 0.01), (0.01, -5.0), (0.0, 3.0)])
        viol += len(rep.violations)
    return viol == 0, {"violations": viol}


# criterion id -> (title, function, suites)
CHECKS = {
    "1": ("Hopf curve exactness", check_hopf_curve, ("hopf",)),
    "2": ("Curve intersection", check_intersection, ("hopf",)),
    "3": ("Bautin point", check_bautin, ("hopf",)),
    "4": ("L2 sign", check_l2, ("hopf",)),
    "5": ("Two nested cycles", check_two_cycles, ("cycles",)),
    "6": ("Generic Hopf cycles", check_generic_hopf, ("cycles",)),
    "7": ("Semistable curve S", check_semistable, ("cycles",)),
    "8": ("Basin (half-plane)", check_basin, ("theorem2",)),
    "9": ("Unbounded orbits", check_escape, ("theorem1",)),
    "10": ("Dulac certificate", check_dulac, ("dulac",)),
    "11": ("Compactification", check_compactification, ()),
    "12": ("Circle equilibria", check_circle, ()),
    "L2inv": ("Invariance of Q1 and x > 0", check_invariance, ("theorem2",)),
}
SUITES = ("all", "theorem1", "theorem2", "hopf", "cycles", "dulac")


def run_check(cid: str, seed: int = 0) -> dict:
    title, fn, _ = CHECKS[cid]
    key = int(cid) if cid.isdigit() else 1000 + sum(map(ord, cid))
    passed, values = fn(np.random.default_rng([seed, key]))
    return {"id": cid, "title": title, "passed": bool(passed), "values": _clean(values)}


def run_suite(suite: str = "all", seed: int = 0) -> dict:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    ids = [c for c, (_, _, s) in CHECKS.items() if suite == "all" or suite in s]
    checks = [run_check(c, seed) for c in ids]
    return {"schema": SCHEMA, "suite": suite, "seed": seed,
            "passed": all(c["passed"] for c in checks), "checks": checks}


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"

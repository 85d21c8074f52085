"""Acceptance criteria 1-13, each at its stated tolerance and runtime budget.

The checks are computed here from the public API rather than by calling
``verify``, so the two act as cross-checks of each other (criterion 13 is
the exception: it exercises the CLI runner itself).  Every criterion records
a PASS/FAIL line that is printed in the pytest terminal summary; running the
file as a script prints the same lines.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from lengyel_epstein import cycles as cyc
from lengyel_epstein import hopf, infinity
from lengyel_epstein.integrate import Fate, IntegratorConfig, escape_search, integrate
from lengyel_epstein.model import (A1, A2, CURVES_MEET_A, Params, basin_b, classify_equilibrium,
                                   dulac_certificate, dulac_majorant, equilibrium, hopf_b, in_set_a,
                                   jacobian)

try:
    from conftest import ACCEPTANCE
except ImportError:  # running as a script from elsewhere
    ACCEPTANCE = {}

S5 = math.sqrt(5.0)


def _record(cid, ok, detail):
    ACCEPTANCE[cid] = (bool(ok), detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {cid}: {detail}")


def _rel(x, ref):
    return abs(x - ref) / abs(ref)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.dt = time.perf_counter() - self.t0


def test_1_hopf_curve_exactness():
    with Timer() as t:
        a = np.linspace(A2, 50.0, 201)[1:]
        tr, det = [], []
        for v in a:
            b = (3 * v * v - 125) / (5 * v)
            J = jacobian(Params(v, b), equilibrium(Params(v, b)))
            tr.append(abs(np.trace(J)))
            det.append(_rel(np.linalg.det(J), v * b * (v * v + 25) / 25))
    ok = max(tr) < 1e-10 and max(det) <= 1e-12 and t.dt < 1.0
    _record("1", ok, f"max|tr|={max(tr):.2e} max det rel={max(det):.2e} t={t.dt:.2f}s")
    assert ok


def test_2_curve_intersection():
    a = 5 * S5
    assert CURVES_MEET_A == pytest.approx(a, rel=1e-15)
    eh, ea = abs(hopf_b(a) - 2 * S5), abs(basin_b(a) - 2 * S5)
    ok = eh <= 1e-12 and ea <= 1e-12
    _record("2", ok, f"|b_H-2sqrt5|={eh:.1e} |b_a-2sqrt5|={ea:.1e}")
    assert ok


def test_3_bautin_point():
    with Timer() as t:
        a = np.linspace(7.0, 30.0, 100)
        l1 = np.array([hopf.first_lyapunov(v) for v in a])
        flips = np.nonzero(np.sign(l1[1:]) != np.sign(l1[:-1]))[0]
        root = hopf.l1_root(a[flips[0]], a[flips[0] + 1]) if len(flips) == 1 else float("nan")
        exact = 2.5 * math.sqrt(27 + math.sqrt(769))
        poly = 2 * a ** 4 - 675 * a ** 2 - 3125
        agree = np.all(np.sign(l1) == np.sign(poly))
    err = _rel(root, exact)
    ok = len(flips) == 1 and err <= 1e-4 and agree and t.dt < 10
    _record("3", ok, f"sign changes={len(flips)} root={root:.8f} rel err={err:.1e} "
                     f"signs agree={bool(agree)} t={t.dt:.2f}s")
    assert ok


def test_4_l2_sign():
    with Timer() as t:
        aB = 2.5 * math.sqrt(27 + math.sqrt(769))
        l2 = hopf.lyapunov_l2(aB)
        fit = hopf.displacement_curvature(aB)
    ok = l2 < 0 and np.sign(fit.leading) == np.sign(l2) and t.dt < 30
    _record("4", ok, f"L2={l2:.4e} displacement leading coeff={fit.leading:.3e} t={t.dt:.1f}s")
    assert ok


def test_5_two_nested_cycles():
    with Timer() as t:
        p = Params(24.712, 13.85)
        n = cyc.count_cycles(p)
        cs = cyc.find_cycles_default(p)
        rel = [_rel(c.floquet_divergence, c.floquet) for c in cs]
    ok = (n == 2 and len(cs) == 2 and cs[0].floquet > 1 and cs[1].floquet < 1
          and max(rel) <= 1e-3 and t.dt < 60)
    _record("5", ok, f"count={n} multipliers={[round(c.floquet, 6) for c in cs]} "
                     f"div/fd rel={max(rel):.1e} t={t.dt:.1f}s")
    assert ok


def test_6_generic_hopf_cycles():
    with Timer() as t:
        below = cyc.find_cycles_default(Params(10.0, 3.4))
        above = cyc.find_cycles_default(Params(20.0, 10.8))
        amp = []
        for d in (0.025, 0.05, 0.1):
            cs = cyc.find_cycles_default(Params(10.0, hopf_b(10.0) - d))
            amp.append(cs[-1].offset if len(cs) == 1 else float("nan"))
        ratio = [amp[i + 1] / amp[i] / math.sqrt(2) for i in range(2)]
    one_stable = len(below) == 1 and below[0].floquet < 1
    two = (len(above) == 2 and above[0].floquet > 1 and above[1].floquet < 1)
    sqrt_law = all(0.5 <= r <= 2.0 for r in ratio)
    ok = one_stable and two and sqrt_law and t.dt < 60
    _record("6", ok, f"(10,3.4): {len(below)} cycle(s) stable={one_stable}; (20,10.8): "
                     f"{len(above)} cycle(s); amplitude ratio/sqrt2={[round(r, 3) for r in ratio]} "
                     f"t={t.dt:.1f}s")
    assert ok


@pytest.mark.slow
def test_7_semistable_curve():
    tol_b = 1e-3
    with Timer() as t:
        rows = []
        for a in (24.712, 20.0, 19.0):
            bs = cyc.semistable_b(a, tol_b=tol_b)
            rows.append((a, bs, bs - hopf_b(a),
                         cyc.count_cycles(Params(a, bs - tol_b)), cyc.count_cycles(Params(a, bs + tol_b))))
    gaps = [r[2] for r in rows]
    ok = (all(g > 0 and lo == 2 and hi == 0 for _, _, g, lo, hi in rows)
          and rows[0][1] > 13.85 and gaps[0] > gaps[1] > gaps[2] and t.dt < 300)
    desc = "; ".join(f"a={a:g} b_S={bs:.5f} gap={g:.4f} counts {lo}/{hi}" for a, bs, g, lo, hi in rows)
    _record("7", ok, f"{desc} t={t.dt:.1f}s")
    assert ok


def test_8_basin():
    with Timer() as t:
        worst, bad = 0.0, []
        for a, b in ((5.0, 1.0), (27.0, 19.0), (3.0, 0.5)):
            p = Params(a, b)
            assert in_set_a(p)
            P = np.array(equilibrium(p))
            for x in np.linspace(0.1, 10 * a, 10):
                for y in np.linspace(-50.0, 50.0, 10):
                    orb = integrate(p, (x, y), record=False)
                    d = float(np.hypot(*(np.array(orb.final_state) - P)))
                    if orb.fate is not Fate.CONVERGED or d > 1e-6:
                        bad.append((a, b, x, y))
                    worst = max(worst, d)
    ok = not bad and t.dt < 120
    _record("8", ok, f"300 orbits, {300 - len(bad)} converged, max dist={worst:.1e} t={t.dt:.1f}s")
    assert ok


def test_9_unbounded_orbits():
    rng = np.random.default_rng(2024)
    with Timer() as t:
        fails, n_stable = [], 0
        for a, b in rng.uniform(1e-9, 30.0, (50, 2)):
            p = Params(a, b)
            n_stable += classify_equilibrium(p).stable
            _, orb = escape_search(p)
            if not (orb.escape_radius_hit or 0) >= 1e6:
                fails.append((a, b))
    ok = not fails and n_stable > 0 and t.dt < 120
    _record("9", ok, f"50 pairs, {len(fails)} without escape, {n_stable} with stable P_a t={t.dt:.1f}s")
    assert ok


def test_10_dulac():
    rng = np.random.default_rng(10)
    with Timer() as t:
        bad, n = [], 0
        while n < 1000:
            a, b = rng.uniform(0.01, 50.0), rng.uniform(0.0, 50.0)
            p = Params(a, b)
            if not in_set_a(p):
                continue
            n += 1
            if not dulac_certificate(p).holds:
                bad.append((a, b))
        a = rng.uniform(0.01, 50.0, 100)
        g = float(np.abs(dulac_majorant(a, np.cbrt(a))).max())
    ok = not bad and g <= 1e-12 and t.dt < 5
    _record("10", ok, f"1000 pairs in A, {len(bad)} failures, max|g(a^(1/3))|={g:.1e} t={t.dt:.2f}s")
    assert ok


def test_11_compactification():
    rng = np.random.default_rng(11)
    with Timer() as t:
        worst = 0.0
        for chart in infinity.Chart:
            for _ in range(1000):
                p = Params(*rng.uniform(0.1, 30.0, 2))
                x, y = rng.uniform(0.1, 10.0, 2) * rng.choice([-1.0, 1.0], 2)
                if not chart.contains(x, y):
                    x, y = (-x, y) if chart in (infinity.Chart.U1, infinity.Chart.V1) else (x, -y)
                u, v = chart.to_chart(x, y)
                lhs = np.array(chart.field(p, u, v))
                rhs = v * v * np.array(infinity.pushforward(p, chart, x, y))
                worst = max(worst, float(np.abs(lhs - rhs).max() / np.abs(rhs).max()))
        ev_err = 0.0
        for _ in range(20):
            p = Params(*rng.uniform(0.1, 30.0, 2))
            h = 1e-30  # complex step, no cancellation
            J = np.array([np.imag(infinity.chart_u1_field(p, -p.b + 1j * h, 0.0)),
                          np.imag(infinity.chart_u1_field(p, -p.b, 1j * h))]).T / h
            ev_err = max(ev_err, float(np.abs(np.linalg.eigvals(J) - 1).max()))
        bup = 0.0
        for _ in range(1000):
            p = Params(*rng.uniform(0.1, 30.0, 2))
            r, th = rng.uniform(1e-4, 1e-2), rng.uniform(0, 2 * math.pi)
            lhs = np.array(infinity.blowup_pushforward(p, r, th))
            rhs = (1 + math.sin(th) ** 2) / r ** 2 * np.array(
                infinity.chart_u2_field(p, r * math.cos(th), r * r * math.sin(th)))
            bup = max(bup, float(np.abs(lhs - rhs).max() / np.abs(rhs).max()))
    ok = worst <= 1e-10 and ev_err <= 1e-10 and bup <= 1e-8 and t.dt < 5
    _record("11", ok, f"pushforward rel={worst:.1e} I1 eig err={ev_err:.1e} blow-up rel={bup:.1e} "
                      f"t={t.dt:.2f}s")
    assert ok


def test_12_circle_equilibria():
    rng = np.random.default_rng(12)
    with Timer() as t:
        roots = infinity.circle_roots()
        th0 = math.asin(S5 - 2)
        expected = sorted([0.0, math.pi / 2, math.pi, math.pi + th0, 3 * math.pi / 2, 2 * math.pi - th0])
        root_err = max(abs(r - e) for r, e in zip(roots, expected)) if len(roots) == 6 else math.inf
        jac_err, red_err, sn_ok = 0.0, 0.0, True
        for _ in range(10):
            a, b = rng.uniform(0.1, 30.0, 2)
            p = Params(a, b)
            f = lambda r, th: infinity.blowup_field(p, r, th)  # noqa: E731
            sn = [[0, 0], [(152 - 68 * S5) * (2 * a + 5 * b), 320 - 144 * S5]]
            cases = {0.0: [[-1, 0], [0, 2]], math.pi / 2: [[0, 0], [0, -8]],
                     3 * math.pi / 2: [[0, 0], [0, 8]], math.pi + th0: sn, 2 * math.pi - th0: sn}
            for th, m in cases.items():
                fd = infinity.numeric_jacobian(f, (0.0, th))
                jac_err = max(jac_err, float(np.abs(fd - np.array(m, float)).max() / max(1, np.abs(m).max())))
            d = infinity.semi_hyperbolic_reduce(f, (0.0, math.pi / 2))
            red_err = max(red_err, abs(d.lam + 8), abs(d.m - 5), _rel(d.a_m, a * b / 4))
            d = infinity.semi_hyperbolic_reduce(f, (0.0, 3 * math.pi / 2))
            red_err = max(red_err, abs(d.lam - 8), abs(d.m - 5), _rel(d.a_m, -a * b / 4))
            d1 = infinity.semi_hyperbolic_reduce(f, (0.0, math.pi + th0))
            d2 = infinity.semi_hyperbolic_reduce(f, (0.0, 2 * math.pi - th0))
            sn_ok = sn_ok and d1.m == 2 and d1.a_m > 0 and d2.m == 2 and d2.a_m < 0
    ok = len(roots) == 6 and root_err <= 1e-12 and jac_err <= 1e-6 and red_err <= 1e-6 and sn_ok and t.dt < 10
    _record("12", ok, f"{len(roots)} roots, err={root_err:.1e}; Jacobian fd err={jac_err:.1e}; "
                      f"reduction err={red_err:.1e}; saddle-node m=2 signs ok={sn_ok} t={t.dt:.2f}s")
    assert ok


def test_13_determinism(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        subprocess.run([sys.executable, "-m", "lengyel_epstein.cli", "verify", "--suite", "all",
                        "--seed", "7", "--out", str(d)], capture_output=True, timeout=600)
        outs.append((d / "verify.json").read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    _record("13", ok, f"two runs of verify --suite all --seed 7: identical={ok} ({len(outs[0])} bytes)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))

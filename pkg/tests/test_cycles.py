import json
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from lengyel_epstein import cycles as cyc
from lengyel_epstein.cycles import NoReturn, Section, Stability
from lengyel_epstein.model import A1, Params, basin_b, equilibrium, hopf_b, vector_field


def scipy_return(p, x0):
    """Independent first return to the ray y = y_P, x > x_P, crossing upward."""
    xp, yp = equilibrium(p)

    def ev(t, s):
        return s[1] - yp
    ev.direction = 1.0
    ev.terminal = False
    sol = solve_ivp(lambda t, s: vector_field(p, s), (0, 50), [x0, yp], method="DOP853",
                    rtol=1e-12, atol=1e-14, events=ev)
    hits = [s[0] for t, s in zip(sol.t_events[0], sol.y_events[0]) if s[0] > xp and t > 1e-9]
    return hits[0]


def test_return_map_matches_scipy():
    p = Params(24.712, 13.85)
    xp = equilibrium(p).x
    for x0 in (xp + 1.0, xp + 3.0):
        assert cyc.return_map(p, x0) == pytest.approx(scipy_return(p, x0), rel=1e-8)


def test_return_map_examples():
    p = Params(5, 1)
    xp = equilibrium(p).x
    try:
        x1 = cyc.return_map(p, xp + 1)
        assert x1 < xp + 1
    except NoReturn as e:
        assert e.reason == "converged"
    p = Params(10, 3.4)
    c = cyc.find_cycles_default(p)[0]
    assert cyc.return_map(p, c.section_x) == pytest.approx(c.section_x, rel=1e-8)
    p = Params(24.712, 13.85)
    inner, outer = cyc.find_cycles_default(p)
    mid = 0.5 * (inner.section_x + outer.section_x)
    assert cyc.return_map(p, mid) > mid


def test_return_map_escape_reported():
    with pytest.raises(NoReturn) as e:
        cyc.return_map(Params(24.712, 13.85), 1e5)
    assert e.value.reason in ("escaped", "budget")


def test_find_cycles_examples():
    assert cyc.find_cycles_default(Params(5, 1)) == []
    cs = cyc.find_cycles_default(Params(24.712, 13.85), with_orbits=True)
    assert [c.stability for c in cs] == [Stability.UNSTABLE, Stability.STABLE]
    assert cs[0].section_x < cs[1].section_x
    for c in cs:
        assert c.period > 0
        assert c.floquet_divergence == pytest.approx(c.floquet, rel=1e-3)
        assert c.orbit.shape[1] == 3 and len(c.orbit) > 10
        # closed curve: last sample is back near the first
        assert np.hypot(*(c.orbit[-1, 1:] - c.orbit[0, 1:])) < 1e-6 * max(1, c.section_x)
    cs = cyc.find_cycles_default(Params(10, 3.4))
    assert len(cs) == 1 and cs[0].stability is Stability.STABLE
    assert 0 < cs[0].floquet < 1


def test_classify_multiplier():
    assert cyc.classify_multiplier(0.5) is Stability.STABLE
    assert cyc.classify_multiplier(1.5) is Stability.UNSTABLE
    assert cyc.classify_multiplier(1.0 + 1e-5) is Stability.SEMISTABLE_SUSPECT


def test_multiplier_by_both_methods():
    p = Params(24.712, 13.85)
    for c in cyc.find_cycles_default(p):
        assert cyc.floquet_multiplier(p, c) == pytest.approx(cyc.divergence_multiplier(p, c), rel=1e-4)


def test_no_cycles_on_a():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = rng.uniform(0.5, 30)
        lo = 0.0 if a <= A1 else basin_b(a)
        assert cyc.count_cycles(Params(a, lo + rng.uniform(0.1, 15))) == 0


def test_sqrt_law():
    amps = [cyc.find_cycles_default(Params(10, hopf_b(10) - d))[0].offset for d in (0.025, 0.05, 0.1)]
    for lo, hi in zip(amps, amps[1:]):
        assert 0.5 <= hi / lo / math.sqrt(2) <= 2


def test_section_robustness():
    for ab in ((24.712, 13.85), (10, 3.4), (5, 1)):
        p = Params(*ab)
        assert cyc.count_cycles(p, section=Section.vertical(p)) == cyc.count_cycles(p)


def test_parallel_sweep_is_deterministic():
    p = Params(24.712, 13.85)
    a = cyc.find_cycles_default(p)
    b = cyc.find_cycles_default(p, workers=3)
    assert [c.to_dict() for c in a] == [c.to_dict() for c in b]


def test_semistable():
    bs = cyc.semistable_b(20.0, tol_b=1e-3)
    assert bs > hopf_b(20)
    assert cyc.count_cycles(Params(20, 0.5 * (hopf_b(20) + bs))) == 2
    lo, hi = cyc.semistable_bracket(24.712, tol_b=1e-3)
    assert hi - lo <= 1e-3 and lo > 13.85
    # near the fold the two multipliers approach 1
    cs = cyc.find_cycles_default(Params(24.712, lo))
    assert len(cs) == 2
    assert all(abs(c.floquet - 1) < 1e-2 for c in cs)


def test_semistable_requires_a_above_bautin():
    with pytest.raises(ValueError):
        cyc.semistable_b(15.0)


def test_json():
    cs = cyc.find_cycles_default(Params(24.712, 13.85))
    rows = json.loads(cyc.cycles_to_json(cs))
    assert [set(r) for r in rows] == [{"section_x", "period", "floquet", "stability"}] * 2
    assert rows[0]["stability"] == "Unstable"

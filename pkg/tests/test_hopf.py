import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lengyel_epstein import hopf
from lengyel_epstein.hopf import Arc, NotOnHopfCurve
from lengyel_epstein.model import A2, Params, equilibrium, hopf_b, jacobian

AB = 2.5 * math.sqrt(27 + math.sqrt(769))


def test_sign_poly():
    assert hopf.l1_sign_poly(10) == -50625
    assert hopf.l1_sign_poly(20) == 46875
    assert abs(hopf.l1_sign_poly(hopf.bautin_a())) < 1e-6


def test_bautin_a():
    assert hopf.bautin_a() == pytest.approx(18.495075, abs=1e-6)
    from scipy.optimize import brentq
    assert brentq(hopf.l1_sign_poly, 10, 30, xtol=1e-14) == pytest.approx(hopf.bautin_a(), rel=1e-10)
    assert hopf.bautin_a() > A2


def test_hopf_data_examples():
    d = hopf.hopf_data(10)
    assert d.b == pytest.approx(3.5)
    assert d.omega == pytest.approx(math.sqrt(175))
    assert d.L1 < 0 and d.arc is Arc.H_MINUS
    d = hopf.hopf_data(20)
    assert d.b == pytest.approx(10.75)
    assert d.L1 > 0 and d.arc is Arc.H_PLUS
    d = hopf.hopf_data(hopf.bautin_a())
    assert abs(d.L1) < 1e-8 and d.arc is Arc.BAUTIN


def test_not_on_curve():
    with pytest.raises(NotOnHopfCurve):
        hopf.hopf_data(5.0)
    with pytest.raises(NotOnHopfCurve):
        hopf.first_lyapunov(A2)


@settings(max_examples=40)
@given(st.floats(A2 + 1e-3, 50))
def test_pure_imaginary(a):
    p = Params(a, hopf_b(a))
    ev = np.linalg.eigvals(jacobian(p, equilibrium(p)))
    d = hopf.hopf_data(a)
    assert np.abs(ev.real).max() < 1e-10 * max(1, d.omega)
    assert np.sort(ev.imag) == pytest.approx([-d.omega, d.omega], rel=1e-10)
    assert d.omega ** 2 == pytest.approx(a * d.b * (a * a + 25) / 25, rel=1e-10)


@settings(max_examples=60)
@given(st.floats(A2 + 1e-3, 50))
def test_l1_sign_agreement(a):
    if abs(a - AB) < 1e-6:
        return
    assert np.sign(hopf.first_lyapunov(a)) == np.sign(hopf.l1_sign_poly(a))


def test_normal_form_scaling():
    # L1 scales like s^2 and L2 like s^4 when the eigenvector is scaled by s
    p = Params(12.0, hopf_b(12.0))
    _, l1, l2 = hopf.lyapunov_coefficients(p)
    _, l1s, l2s = hopf.lyapunov_coefficients(p, scale=2.0)
    assert l1s == pytest.approx(4 * l1, rel=1e-9)
    assert l2s == pytest.approx(16 * l2, rel=1e-9)


def test_normal_form_textbook_case():
    # z' = i z + c |z|^2 z has c1 = c exactly
    G = np.zeros((6, 6), complex)
    G[2, 1] = -0.3 + 0.2j
    G[3, 2] = 0.7 - 0.1j
    c = hopf.normal_form(G, 1.0)
    assert c[2, 1] == pytest.approx(-0.3 + 0.2j)
    assert c[3, 2] == pytest.approx(0.7 - 0.1j)
    # quadratic terms feed c1 = i/(2 omega)(g20 g11 - 2|g11|^2 - |g02|^2/3) + g21/2,
    # with G[j, k] = g_jk/(j! k!)
    G = np.zeros((6, 6), complex)
    G[2, 0], G[1, 1], G[0, 2] = 1.0, 1j, 0.5
    c = hopf.normal_form(G, 1.0)
    assert c[2, 1] == pytest.approx(-1 - 7j / 6, abs=1e-12)
    for j in range(4):
        for k in range(4):
            if j - k != 1 and j + k <= 3:
                assert abs(c[j, k]) < 1e-12


def test_l2():
    assert hopf.lyapunov_l2(hopf.bautin_a()) < 0
    assert hopf.lyapunov_l2(hopf.bautin_a(), scale=3.7) < 0
    fit = hopf.displacement_curvature()
    assert fit.sign == -1


def test_displacement_sign_generic():
    # off the Bautin point the leading term follows L1
    assert hopf.displacement_curvature(10.0).sign == -1
    assert hopf.displacement_curvature(25.0).sign == 1


def test_scan():
    rows = hopf.hopf_scan((7, 30), 100)
    assert len(rows) == 100
    ch = hopf.sign_changes(rows)
    assert len(ch) == 1
    assert abs(hopf.l1_root(*ch[0]) - 18.495) < 1e-2
    assert all(r.L1 < 0 for r in hopf.hopf_scan((7, 15), 20))
    assert all(r.L1 > 0 for r in hopf.hopf_scan((20, 30), 20))
    with pytest.raises(NotOnHopfCurve):
        hopf.hopf_scan((5, 10), 5)


def test_scan_parallel_matches_serial():
    a = hopf.hopf_scan((8, 28), 12)
    b = hopf.hopf_scan((8, 28), 12, workers=3)
    assert a == b


def test_hopf_csv(tmp_path):
    path = tmp_path / "h.csv"
    hopf.write_hopf_csv(hopf.hopf_scan((7, 30), 5), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "a,b,omega,L1,arc"
    assert len(lines) == 6

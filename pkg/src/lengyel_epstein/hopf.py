"""Hopf points along b = b_H(a): frequency, Lyapunov coefficients, Bautin point.

The Lyapunov coefficients come from a complex normal-form reduction of the
field at P_a.  The field is cubic, so its jets are exact: the quadratic and
cubic multilinear forms are written down from analytic derivatives and
projected onto the critical eigenvector pair.  Homological equations are
then solved order by order up to degree 5, giving

    z' = i w z + c1 z|z|^2 + c2 z|z|^4 + ...,   L1 = Re c1 / w,  L2 = Re c2 / w.

Only signs are meaningful: the magnitudes depend on how the eigenvector is
normalized (``scale`` multiplies L1 by scale^2 and L2 by scale^4).
"""

from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .model import A2, Params, equilibrium, hopf_b, jacobian

_DEG = 5


class NotOnHopfCurve(ValueError):
    """Raised for a <= 5 sqrt(5/3), where b_H(a) <= 0."""


class Arc(enum.Enum):
    H_MINUS = "Hminus"
    H_PLUS = "Hplus"
    BAUTIN = "Bautin"


@dataclass(frozen=True)
class HopfData:
    a: float
    b: float
    omega: float
    L1: float
    L2: float | None
    arc: Arc


def l1_sign_poly(a: float) -> float:
    """``2a^4 - 675a^2 - 3125``, a positive multiple of L1 on the Hopf curve."""
    return 2.0 * a ** 4 - 675.0 * a ** 2 - 3125.0


def bautin_a() -> float:
    """Positive root of :func:`l1_sign_poly`, ``(5/2) sqrt(27 + sqrt(769))``."""
    return 2.5 * math.sqrt(27.0 + math.sqrt(769.0))


# --- truncated bivariate series in (z, conj z); C[j, k] multiplies z^j w^k ---

def _mul(A, B):
    C = np.zeros_like(A)
    for j in range(_DEG + 1):
        for k in range(_DEG + 1 - j):
            if A[j, k] != 0:
                C[j:, k:] += A[j, k] * B[:_DEG + 1 - j, :_DEG + 1 - k]
    for j in range(_DEG + 1):
        C[j, _DEG + 1 - j:] = 0
    return C


def _conj(A):
    # coefficients of conj(f(z, conj z)) in the same basis
    return np.conj(A.T)


def _compose(G, Z, W):
    one = np.zeros_like(G)
    one[0, 0] = 1
    zp, wp = [one], [one]
    for _ in range(_DEG):
        zp.append(_mul(zp[-1], Z))
        wp.append(_mul(wp[-1], W))
    out = np.zeros_like(G)
    for j in range(_DEG + 1):
        for k in range(_DEG + 1 - j):
            if G[j, k] != 0:
                out += G[j, k] * _mul(zp[j], wp[k])
    return out


def _dz(A):
    C = np.zeros_like(A)
    for j in range(1, _DEG + 1):
        C[j - 1, :] = j * A[j, :]
    return C


def _dw(A):
    C = np.zeros_like(A)
    for k in range(1, _DEG + 1):
        C[:, k - 1] = k * A[:, k]
    return C


def normal_form(G: np.ndarray, omega: float) -> np.ndarray:
    """Reduce ``z' = i omega z + G(z, conj z)`` to Poincare normal form through degree 5.

    ``G`` holds the nonlinear coefficients (``G[1,0] = G[0,1] = 0``).  Each
    order removes every non-resonant monomial (j - k != 1) with the near
    identity change ``z -> z + h``; the new right-hand side is recovered from
    ``(1 + h_z) z' + h_w conj(z') = f(z + h, conj(z + h))`` by fixed-point
    iteration, which is exact after ``_DEG`` passes since ``h`` is nonlinear.
    """
    G = np.array(G, dtype=complex)
    zid = np.zeros_like(G)
    zid[1, 0] = 1
    wid = np.zeros_like(G)
    wid[0, 1] = 1
    for n in range(2, _DEG + 1):
        h = np.zeros_like(G)
        for j in range(n + 1):
            k = n - j
            if j - k != 1:
                h[j, k] = G[j, k] / (1j * omega * (j - k - 1))
        full = G.copy()
        full[1, 0] += 1j * omega
        rhs = _compose(full, zid + h, wid + _conj(h))
        hz, hw = _dz(h), _dw(h)
        zd = full.copy()
        for _ in range(_DEG + 2):
            zd = rhs - _mul(hz, zd) - _mul(hw, _conj(zd))
        G = zd
        G[1, 0] -= 1j * omega
    return G


def _hopf_jets(p: Params, scale: float = 1.0):
    """Project the field at P_a onto the critical eigenvectors; returns (omega, G)."""
    a, b = p.a, p.b
    x, _ = equilibrium(p)
    J = jacobian(p, equilibrium(p))
    w, V = np.linalg.eig(J)
    i = int(np.argmax(w.imag))
    omega = float(w[i].imag)
    if not omega > 0:
        raise NotOnHopfCurve(f"no complex eigenvalue pair at {p}")
    q = V[:, i] * scale
    wl, Vl = np.linalg.eig(J.T)
    pv = Vl[:, int(np.argmin(wl.imag))]
    pv = pv / np.conj(np.vdot(pv, q))  # <p, q> = conj(p) . q = 1

    # nonzero derivatives of the cubic field at P_a
    pxx, pxy, pxxx = 2.0 * a - 6.0 * x, -4.0, -6.0
    qxx, qxy, qxxx = 6.0 * b * x, -b, 6.0 * b

    def B(u, v):
        m = u[0] * v[1] + u[1] * v[0]
        return np.array([pxx * u[0] * v[0] + pxy * m, qxx * u[0] * v[0] + qxy * m])

    def C(u, v, s):
        t = u[0] * v[0] * s[0]
        return np.array([pxxx * t, qxxx * t])

    qb = np.conj(q)
    pr = lambda vec: np.vdot(pv, vec)
    G = np.zeros((_DEG + 1, _DEG + 1), complex)
    G[2, 0] = pr(B(q, q)) / 2
    G[1, 1] = pr(B(q, qb))
    G[0, 2] = pr(B(qb, qb)) / 2
    G[3, 0] = pr(C(q, q, q)) / 6
    G[2, 1] = pr(C(q, q, qb)) / 2
    G[1, 2] = pr(C(q, qb, qb)) / 2
    G[0, 3] = pr(C(qb, qb, qb)) / 6
    return omega, G


def lyapunov_coefficients(p: Params, scale: float = 1.0) -> tuple[float, float, float]:
    """``(omega, L1, L2)`` at P_a; meaningful when the trace there vanishes."""
    omega, G = _hopf_jets(p, scale)
    nf = normal_form(G, omega)
    return omega, float(nf[2, 1].real / omega), float(nf[3, 2].real / omega)


def _check_on_curve(a: float) -> float:
    if not a > A2:
        raise NotOnHopfCurve(f"a = {a!r} must exceed 5*sqrt(5/3) = {A2:.6f}")
    return hopf_b(a)


def first_lyapunov(a: float) -> float:
    b = _check_on_curve(a)
    return lyapunov_coefficients(Params(a, b))[1]


def lyapunov_l2(a: float, scale: float = 1.0) -> float:
    """Second Lyapunov coefficient at (a, b_H(a)); only normalization-free near a_B."""
    b = _check_on_curve(a)
    return lyapunov_coefficients(Params(a, b), scale)[2]


def arc_of(a: float, tol: float = 1e-9) -> Arc:
    ab = bautin_a()
    if abs(a - ab) <= tol * ab:
        return Arc.BAUTIN
    return Arc.H_MINUS if a < ab else Arc.H_PLUS


def hopf_data(a: float, with_l2: bool = False) -> HopfData:
    """Hopf point at (a, b_H(a)); raises NotOnHopfCurve for a <= 5 sqrt(5/3)."""
    b = _check_on_curve(a)
    omega, l1, l2 = lyapunov_coefficients(Params(a, b))
    return HopfData(a=float(a), b=b, omega=omega, L1=l1, L2=l2 if with_l2 else None, arc=arc_of(a))


def hopf_scan(a_range=(7.0, 30.0), n: int = 100, workers: int = 1) -> list[HopfData]:
    lo, hi = a_range
    if not lo > A2:
        raise NotOnHopfCurve(f"scan range must lie above 5*sqrt(5/3) = {A2:.6f}")
    if n < 1:
        raise ValueError("n must be >= 1")
    grid = [float(v) for v in np.linspace(lo, hi, n)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(hopf_data, grid))
    return [hopf_data(v) for v in grid]


def sign_changes(rows: list[HopfData]) -> list[tuple[float, float]]:
    """Consecutive a-intervals over which L1 changes sign."""
    out = []
    for r0, r1 in zip(rows, rows[1:]):
        if r0.L1 * r1.L1 < 0 or (r0.L1 == 0.0 and r0 is rows[0]):
            out.append((r0.a, r1.a))
    return out


def l1_root(lo: float = 7.0, hi: float = 30.0) -> float:
    """Zero of the numerical L1 on [lo, hi] (brentq; needs a sign change)."""
    return brentq(first_lyapunov, lo, hi, xtol=1e-13, rtol=1e-15)


def write_hopf_csv(rows: list[HopfData], path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "b", "omega", "L1", "arc"])
        for r in rows:
            w.writerow([repr(r.a), repr(r.b), repr(r.omega), repr(r.L1), r.arc.value])


@dataclass(frozen=True)
class DisplacementFit:
    offsets: np.ndarray
    displacement: np.ndarray
    coefficients: np.ndarray  # of d(s)/s in powers s^2, s^4, s^6
    leading: float

    @property
    def sign(self) -> int:
        return int(np.sign(self.leading))


def displacement_curvature(a: float | None = None, s_values=None) -> DisplacementFit:
    """Sign of the return-map nonlinearity at a weak focus on the Hopf curve.

    The displacement ``d(s)`` on the horizontal ray is sampled at small
    offsets and ``d(s)/s`` is fitted by an even polynomial ``c2 s^2 + c4 s^4 +
    c6 s^6``.  At a generic Hopf point the sign of c2 is that of L1; at the
    Bautin point c2 vanishes and the sign of c4 is that of L2.  ``leading`` is
    c4 when |c2| is negligible against c4 s^2 over the sample range, else c2.
    """
    from .cycles import ReturnConfig, displacement

    a = bautin_a() if a is None else float(a)
    p = Params(a, _check_on_curve(a))
    s = np.asarray(s_values if s_values is not None else np.linspace(0.05, 0.4, 15), dtype=float)
    cfg = ReturnConfig(rel_tol=1e-13, abs_tol=1e-16)
    d = np.array([displacement(p, float(v), cfg=cfg) for v in s])
    A = np.column_stack([s ** 2, s ** 4, s ** 6])
    coef, *_ = np.linalg.lstsq(A, d / s, rcond=None)
    c2, c4 = coef[0], coef[1]
    smax = float(s.max())
    leading = c4 if abs(c2) < 1e-2 * abs(c4) * smax ** 2 else c2
    return DisplacementFit(s, d, coef, float(leading))

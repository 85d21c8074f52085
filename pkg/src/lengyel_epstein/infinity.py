"""Behaviour at infinity: Poincare charts, infinite equilibria and the blow-up at I3.

Charts: U1 is u = y/x, v = 1/x (x > 0); U2 is u = x/y, v = 1/y (y > 0).
V1 and V2 use the same formulas on x < 0 and y < 0.  The field has degree
3, so each chart field is v^2 times the pushforward of the planar field and
the antipodal charts carry the same expressions (factor (-1)^(3-1) = 1).

The degenerate point at the origin of U2 is blown up with
(u, v) = (r cos t, r^2 sin t).  Functions that take ``r, theta`` accept
complex arguments so that Taylor coefficients can be read off by FFT.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .model import Params

THETA0 = math.asin(math.sqrt(5.0) - 2.0)
LAMBDA_SN = 320.0 - 144.0 * math.sqrt(5.0)  # raw eigenvalue at pi +- THETA0
JAC_SN_21 = 152.0 - 68.0 * math.sqrt(5.0)  # times (2a + 5b)
CIRCLE_ANGLES = (0.0, math.pi / 2, math.pi, math.pi + THETA0, 3 * math.pi / 2, 2 * math.pi - THETA0)


class Chart(enum.Enum):
    U1 = "U1"
    V1 = "V1"
    U2 = "U2"
    V2 = "V2"

    def contains(self, x: float, y: float) -> bool:
        return {"U1": x > 0, "V1": x < 0, "U2": y > 0, "V2": y < 0}[self.value]

    def to_chart(self, x: float, y: float) -> tuple[float, float]:
        if not self.contains(x, y):
            raise ValueError(f"({x}, {y}) is outside chart {self.value}")
        if self in (Chart.U1, Chart.V1):
            return y / x, 1.0 / x
        return x / y, 1.0 / y

    def from_chart(self, u: float, v: float) -> tuple[float, float]:
        if v == 0:
            raise ValueError("v = 0 is the circle at infinity")
        if self in (Chart.U1, Chart.V1):
            return 1.0 / v, u / v
        return u / v, 1.0 / v

    def field(self, p: Params, u, v):
        return chart_u1_field(p, u, v) if self in (Chart.U1, Chart.V1) else chart_u2_field(p, u, v)


class InfiniteKind(enum.Enum):
    UNSTABLE_NODE = "UnstableNode"
    DEGENERATE = "DegenerateBlowupRequired"


class CircleKind(enum.Enum):
    HYPERBOLIC_SADDLE = "HyperbolicSaddle"
    TOPOLOGICAL_SADDLE = "TopologicalSaddle"
    SADDLE_NODE = "SaddleNode"
    SEMI_HYPERBOLIC_NODE = "SemiHyperbolicNode"


@dataclass(frozen=True)
class InfiniteEquilibrium:
    label: str
    chart: Chart
    coords: tuple[float, float]
    kind: InfiniteKind
    jacobian: np.ndarray | None = None
    # {"hyperbolic_sectors": int, "parabolic_sectors": int, "parabolic_meets_interior": bool}
    sector_structure: dict | None = None


@dataclass(frozen=True)
class SemiHypData:
    lam: float
    m: int
    a_m: float


@dataclass(frozen=True)
class CircleEquilibrium:
    theta: float
    jacobian_at_r0: np.ndarray
    classification: CircleKind
    semi_hyp_data: SemiHypData | None = None
    # the raw eigenvalue at pi +- theta0 is 320 - 144 sqrt5 < 0; the opposite sign is quoted in the literature
    lambda_sign_flag: bool = False
    notes: dict = field(default_factory=dict)


class FullyDegenerate(ArithmeticError):
    """Both eigenvalues of the linearization vanish."""


class SeriesOrderExceeded(ArithmeticError):
    """No nonzero coefficient of the reduced equation up to the requested order."""


def chart_u1_field(p: Params, u, v):
    a, b = p.a, p.b
    du = b + u - (a + b - 4 * u) * u * v + (b + u) * v ** 2 - a * u * v ** 3
    dv = v * (1 + 4 * u * v + v ** 2 - a * (v + v ** 3))
    return du, dv


def chart_u2_field(p: Params, u, v):
    a, b = p.a, p.b
    du = (-b * u ** 4 - b * u ** 2 * v ** 2 + a * u ** 2 * v + a * v ** 3 + b * u ** 2 * v
          - u ** 3 - u * v ** 2 - 4 * u * v)
    dv = -b * u ** 3 * v - b * u * v ** 3 + b * u * v ** 2
    return du, dv


def pushforward(p: Params, chart: Chart, x: float, y: float) -> tuple[float, float]:
    """Time derivative of the chart coordinates along the planar field (no rescaling)."""
    from .model import vector_field

    fx, fy = vector_field(p, (x, y))
    if chart in (Chart.U1, Chart.V1):
        return (fy * x - y * fx) / (x * x), -fx / (x * x)
    return (fx * y - x * fy) / (y * y), -fy / (y * y)


def blowup_field(p: Params, r, theta):
    """Blown-up field at the origin of U2, common factor removed."""
    a, b = p.a, p.b
    c, s = np.cos(theta), np.sin(theta)
    c2, s2, c3, s3 = np.cos(2 * theta), np.sin(2 * theta), np.cos(3 * theta), np.sin(3 * theta)
    dr = (r * (-0.75 * c * c + c * (-0.25 * c3 - 2 * s2))
          + r ** 2 * c * (-b / 2 - b / 2 * c2 + (a / 4 + b) * s + a / 4 * s3)
          + r ** 3 * (-0.25 * c * c + 0.25 * c * c3)
          + r ** 4 * c * (-b / 2 + b / 2 * c2 + 0.75 * a * s - a / 4 * s3))
    dt = (2 * c * s * (c * c + 4 * s)
          + r * (b * c ** 4 * s + (-2 * a - b) * c * c * s * s)
          + r ** 2 * s * s * s2
          + r ** 3 * (b * c * c * s ** 3 - 2 * a * s ** 4))
    return dr, dt


def blowup_pushforward(p: Params, r: float, theta: float) -> tuple[float, float]:
    """Image of the blow-up field under (r, t) -> (r cos t, r^2 sin t)."""
    dr, dt = blowup_field(p, r, theta)
    c, s = math.cos(theta), math.sin(theta)
    return c * dr - r * s * dt, 2 * r * s * dr + r * r * c * dt


def circle_polynomial(theta):
    """Angular component of the blow-up field on r = 0."""
    return 2 * np.cos(theta) * np.sin(theta) * (np.cos(theta) ** 2 + 4 * np.sin(theta))


def blowup_jacobian(p: Params, theta: float) -> np.ndarray:
    """Analytic Jacobian of the blow-up field on the circle r = 0."""
    a, b = p.a, p.b
    c, s = math.cos(theta), math.sin(theta)
    s2 = math.sin(2 * theta)
    rr = -0.75 * c * c + c * (-0.25 * math.cos(3 * theta) - 2 * s2)
    tr = b * c ** 4 * s - (2 * a + b) * c * c * s * s
    tt = 2 * math.cos(2 * theta) * (c * c + 4 * s) + s2 * (4 * c - s2)
    return np.array([[rr, 0.0], [tr, tt]])


def numeric_jacobian(f, point, h: float = 1e-6) -> np.ndarray:
    """Central differences of a planar map ``f(r, t) -> (fr, ft)``."""
    r, t = point
    cols = []
    for dr, dt in ((h, 0.0), (0.0, h)):
        fp = np.array(f(r + dr, t + dt), dtype=float)
        fm = np.array(f(r - dr, t - dt), dtype=float)
        cols.append((fp - fm) / (2 * h))
    return np.column_stack(cols)


def circle_roots(resolution: float = 1e-4) -> list[float]:
    """Zeros of :func:`circle_polynomial` on [0, 2 pi) by sign sweep and brentq."""
    n = int(math.ceil(2 * math.pi / resolution))
    # shift the grid by half a cell so that theta = 0 is bracketed, not hit
    grid = -0.5 * resolution + resolution * np.arange(n + 1)
    vals = circle_polynomial(grid)
    roots = []
    for i in range(n):
        if vals[i] * vals[i + 1] < 0:
            t = brentq(lambda u: float(circle_polynomial(u)), grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)
            t = t % (2 * math.pi)
            if 2 * math.pi - t < 1e-12:
                t = 0.0
            roots.append(t)
    out = []
    for t in sorted(roots):
        if not out or t - out[-1] > 1e-9:
            out.append(t)
    return out


def _taylor2(g, center, n: int = 32, rho: float = 0.5):
    """Taylor coefficients C[j, k] of both components of ``g`` about ``center``.

    Cauchy integral on the polycircle of radius ``rho`` evaluated with a 2-D
    FFT; ``g`` must accept complex arrays.
    """
    ph = np.exp(2j * np.pi * np.arange(n) / n)
    z1 = center[0] + rho * ph[:, None] * np.ones(n)[None, :]
    z2 = center[1] + rho * np.ones(n)[:, None] * ph[None, :]
    out = []
    j = np.arange(n)
    scale = rho ** (j[:, None] + j[None, :])
    for comp in g(z1, z2):
        c = np.fft.fft2(np.asarray(comp, dtype=complex)) / (n * n)
        out.append((c / scale).real)
    return out


def _series_compose(C, f, order):
    """Coefficients of sum_jk C[j, k] x^j f(x)^k up to x^order (f has no constant term)."""
    N = order + 1
    res = np.zeros(N)
    fp = np.zeros(N)
    fp[0] = 1.0
    for k in range(min(N, C.shape[1])):
        for j in range(min(N, C.shape[0])):
            res[j:] += C[j, k] * fp[:N - j]
        fp = np.convolve(fp, f)[:N]
    return res


def _poly_mul(A, B, deg):
    """Product of two bivariate coefficient arrays, truncated at total degree ``deg``."""
    C = np.zeros((deg + 1, deg + 1))
    for j in range(deg + 1):
        for k in range(deg + 1 - j):
            if A[j, k] != 0.0:
                C[j:, k:] += A[j, k] * B[:deg + 1 - j, :deg + 1 - k]
    for j in range(deg + 1):
        C[j, deg + 1 - j:] = 0.0
    return C


def _linear_substitute(C, T, deg):
    """Coefficients of ``sum C[j,k] r^j t^k`` with ``(r, t) = T (xi, eta)``."""
    r = np.zeros((deg + 1, deg + 1))
    t = np.zeros((deg + 1, deg + 1))
    r[1, 0], r[0, 1] = T[0, 0], T[0, 1]
    t[1, 0], t[0, 1] = T[1, 0], T[1, 1]
    one = np.zeros((deg + 1, deg + 1))
    one[0, 0] = 1.0
    rp, tp = [one], [one]
    for _ in range(deg):
        rp.append(_poly_mul(rp[-1], r, deg))
        tp.append(_poly_mul(tp[-1], t, deg))
    out = np.zeros((deg + 1, deg + 1))
    for j in range(deg + 1):
        for k in range(deg + 1 - j):
            if C[j, k] != 0.0:
                out += C[j, k] * _poly_mul(rp[j], tp[k], deg)
    return out


def semi_hyperbolic_reduce(field, eq, order: int = 6, tol: float = 1e-9,
                           n_fft: int = 32, rho: float = 0.5) -> SemiHypData:
    """Reduction at a semi-hyperbolic point of ``field(r, t) -> (dr, dt)``.

    Taylor coefficients are taken in the original variables and moved to the
    eigenbasis (centre eigenvector scaled so its first component is 1) by exact
    polynomial substitution.  The nonzero-eigenvalue equation is solved for the
    graph ``eta = f(xi)`` as a power series, and the first nonzero coefficient
    ``a_m xi^m`` of the centre component restricted to that graph is returned.
    Coefficients below ``tol`` times the largest Jacobian entry count as zero.
    """
    r0, t0 = float(eq[0]), float(eq[1])
    Cr, Ct = _taylor2(field, (r0, t0), n_fft, rho)
    deg = order
    Cr, Ct = Cr[:deg + 1, :deg + 1].copy(), Ct[:deg + 1, :deg + 1].copy()
    for j in range(deg + 1):
        Cr[j, deg + 1 - j:] = 0.0
        Ct[j, deg + 1 - j:] = 0.0
    Cr[0, 0] = Ct[0, 0] = 0.0  # eq is an equilibrium
    J = np.array([[Cr[1, 0], Cr[0, 1]], [Ct[1, 0], Ct[0, 1]]])
    w, V = np.linalg.eig(J)
    scale = max(1.0, float(np.abs(J).max()))
    small = np.abs(w) <= tol * scale
    if small.all():
        raise FullyDegenerate(f"both eigenvalues vanish at {eq}")
    if not small.any():
        raise ValueError(f"equilibrium {eq} is hyperbolic (eigenvalues {w})")
    i0 = int(np.argmin(np.abs(w)))
    lam = float(w[1 - i0].real)
    v0 = V[:, i0].real
    if abs(v0[0]) <= tol:
        raise ValueError("centre direction is tangent to r = const; reorder the variables")
    v0 = v0 / v0[0]
    T = np.column_stack([v0, V[:, 1 - i0].real])
    Ti = np.linalg.inv(T)
    Sr, St = _linear_substitute(Cr, T, deg), _linear_substitute(Ct, T, deg)
    Gc = Ti[0, 0] * Sr + Ti[0, 1] * St
    Gh = Ti[1, 0] * Sr + Ti[1, 1] * St

    f = np.zeros(order + 1)
    for _ in range(order + 3):
        th = _series_compose(Gh, f, order)
        f = -(th - lam * f) / lam
        f[:2] = 0.0
    red = _series_compose(Gc, f, order)
    for m in range(1, order + 1):
        if abs(red[m]) > tol * scale:
            return SemiHypData(lam=lam, m=m, a_m=float(red[m]))
    raise SeriesOrderExceeded(f"no nonzero coefficient through order {order} at {eq}")


def _classify_semi(d: SemiHypData) -> CircleKind:
    if d.m % 2 == 0:
        return CircleKind.SADDLE_NODE
    return CircleKind.TOPOLOGICAL_SADDLE if d.a_m / d.lam < 0 else CircleKind.SEMI_HYPERBOLIC_NODE


def circle_equilibria(p: Params) -> list[CircleEquilibrium]:
    """The six equilibria on r = 0 with Jacobians and reduction data."""
    out = []
    f = lambda r, t: blowup_field(p, r, t)
    for t in CIRCLE_ANGLES:
        J = blowup_jacobian(p, t)
        if abs(J[0, 0]) > 1e-9 and abs(J[1, 1]) > 1e-9:
            out.append(CircleEquilibrium(t, J, CircleKind.HYPERBOLIC_SADDLE))
            continue
        d = semi_hyperbolic_reduce(f, (0.0, t))
        flag = abs(t - math.pi - THETA0) < 1e-12 or abs(t - 2 * math.pi + THETA0) < 1e-12
        notes = {"quoted_lambda": -LAMBDA_SN} if flag else {}
        out.append(CircleEquilibrium(t, J, _classify_semi(d), d, flag, notes))
    return out


def infinite_equilibria(p: Params) -> list[InfiniteEquilibrium]:
    """I1, I2 (unstable nodes on the x-directions) and I3, I4 (degenerate, y-directions).

    I3 and I4 have the same local equations; the disk interior is v > 0 at I3
    and v < 0 at I4, which is where the parabolic sector lies.
    """
    a, b = p.a, p.b
    J1 = np.array([[1.0, b * (a + 5 * b)], [0.0, 1.0]])
    sectors = {"hyperbolic_sectors": 4, "parabolic_sectors": 1}
    return [
        InfiniteEquilibrium("I1", Chart.U1, (-b, 0.0), InfiniteKind.UNSTABLE_NODE, J1),
        InfiniteEquilibrium("I2", Chart.V1, (-b, 0.0), InfiniteKind.UNSTABLE_NODE, J1.copy()),
        InfiniteEquilibrium("I3", Chart.U2, (0.0, 0.0), InfiniteKind.DEGENERATE, np.zeros((2, 2)),
                            dict(sectors, parabolic_meets_interior=False)),
        InfiniteEquilibrium("I4", Chart.V2, (0.0, 0.0), InfiniteKind.DEGENERATE, np.zeros((2, 2)),
                            dict(sectors, parabolic_meets_interior=True)),
    ]


def disk_projection(s):
    """``s / (1 + |s|)``: the plane onto the open unit disk; works on (N, 2) arrays."""
    arr = np.asarray(s, dtype=float)
    if arr.ndim == 1:
        return arr / (1.0 + math.hypot(arr[0], arr[1]))
    return arr / (1.0 + np.hypot(arr[:, 0], arr[:, 1]))[:, None]

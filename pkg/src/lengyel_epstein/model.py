"""Closed-form layer of the Lengyel-Epstein cubic family.

The polynomial field is

    x' = (a - x)(1 + x^2) - 4xy,    y' = bx(1 + x^2 - y),

which is the rational reaction model multiplied by the positive factor
``1 + x^2``.  Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

# parameter-plane anchors
A1 = 3.0 * math.sqrt(3.0)  # basin_b(A1) == 0
A2 = 5.0 * math.sqrt(5.0 / 3.0)  # hopf_b(A2) == 0
CURVES_MEET_A = 5.0 * math.sqrt(5.0)  # hopf_b and basin_b intersect here, at b = 2*sqrt(5)


@dataclass(frozen=True)
class Params:
    """Model parameters; both must be positive and finite."""

    a: float
    b: float

    def __post_init__(self):
        for name in ("a", "b"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating, np.integer)) and math.isfinite(v) and v > 0):
                raise ValueError(f"parameter {name} must be a positive finite number, got {v!r}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))


class State(NamedTuple):
    x: float
    y: float


class EquilibriumKind(enum.Enum):
    STABLE_NODE = "StableNode"
    STABLE_FOCUS = "StableFocus"
    # linear centre; classify_equilibrium reports Hopf candidates as DEGENERATE
    CENTER_LINEAR = "Center_Linear"
    UNSTABLE_FOCUS = "UnstableFocus"
    UNSTABLE_NODE = "UnstableNode"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class EquilibriumReport:
    location: State
    jacobian: np.ndarray
    trace: float
    determinant: float
    eigenvalues: tuple[complex, complex]
    kind: EquilibriumKind

    @property
    def stable(self) -> bool:
        return self.kind in (EquilibriumKind.STABLE_NODE, EquilibriumKind.STABLE_FOCUS)


class Region(enum.Enum):
    IN_A = "InA"
    IN_B_NOT_A = "InB_NotA"
    ON_H_MINUS = "OnHminus"
    ON_H_PLUS = "OnHplus"
    AT_BAUTIN = "AtBautin"
    IN_D = "InD"
    UNSTABLE_OUTSIDE_D = "UnstableOutsideD"
    ON_S_APPROX = "OnSapprox"


@dataclass(frozen=True)
class RegionReport:
    label: Region
    b_h_at_a: float
    b_a_at_a: float
    # which piece of the set A matched: the "a <= 3*sqrt(3)" strip or "b > b_a"
    a_by_threshold: bool
    a_by_curve: bool
    in_b: bool
    d_status: str = "n/a"  # "resolved", "unresolved" or "n/a"
    n_cycles: int | None = None


@dataclass(frozen=True)
class DulacCertificate:
    holds: bool
    worst_x: float
    worst_value: float
    grid: tuple[float, float] = field(default=(0.0, 0.0))
    majorant_at_peak: float = 0.0


def vector_field(p: Params, s) -> tuple[float, float]:
    x, y = s
    return (p.a - x) * (1.0 + x * x) - 4.0 * x * y, p.b * x * (1.0 + x * x - y)


def original_vector_field(p: Params, s) -> tuple[float, float]:
    """Rational right-hand side; ``vector_field == (1 + x^2) * original_vector_field``."""
    x, y = s
    q = 1.0 + x * x
    return p.a - x - 4.0 * x * y / q, p.b * x * (1.0 - y / q)


def equilibrium(p: Params) -> State:
    return State(p.a / 5.0, 1.0 + p.a * p.a / 25.0)


def jacobian(p: Params, s) -> np.ndarray:
    x, y = s
    a, b = p.a, p.b
    return np.array([
        [2.0 * a * x - 1.0 - 3.0 * x * x - 4.0 * y, -4.0 * x],
        [b * (1.0 + 3.0 * x * x - y), -b * x],
    ])


def trace_at_equilibrium(p: Params) -> float:
    return 3.0 * p.a ** 2 / 25.0 - 5.0 - p.a * p.b / 5.0


def det_at_equilibrium(p: Params) -> float:
    return p.a * p.b * (p.a ** 2 + 25.0) / 25.0


def classify_equilibrium(p: Params, tol_trace: float = 1e-9) -> EquilibriumReport:
    """Linear classification of the unique equilibrium.

    ``tol_trace`` is relative to the size of the terms making up the trace;
    inside that band the point is reported DEGENERATE (Hopf candidate).
    Discriminant ties resolve to nodes.
    """
    loc = equilibrium(p)
    jac = jacobian(p, loc)
    tr = float(jac[0, 0] + jac[1, 1])
    det = float(jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0])
    ev = np.linalg.eigvals(jac)
    eigs = (complex(ev[0]), complex(ev[1]))
    scale = max(1.0, 3.0 * p.a ** 2 / 25.0 + 5.0 + p.a * p.b / 5.0)
    disc = tr * tr - 4.0 * det
    if det <= 0.0 or abs(tr) <= tol_trace * scale:
        kind = EquilibriumKind.DEGENERATE
    elif tr < 0.0:
        kind = EquilibriumKind.STABLE_NODE if disc >= 0.0 else EquilibriumKind.STABLE_FOCUS
    else:
        kind = EquilibriumKind.UNSTABLE_NODE if disc >= 0.0 else EquilibriumKind.UNSTABLE_FOCUS
    return EquilibriumReport(loc, jac, tr, det, eigs, kind)


def hopf_b(a: float) -> float:
    """Value of b on the Hopf curve, where the trace at the equilibrium vanishes."""
    return (3.0 * a * a - 125.0) / (5.0 * a)


def basin_b(a: float) -> float:
    """Lower boundary ``a - 3 a^(1/3)`` of the basin-certificate set for large a."""
    r = a - 3.0 * np.cbrt(a)
    return float(r) if np.ndim(r) == 0 else r


def in_set_a(p: Params) -> bool:
    return bool(p.a <= A1 or p.b > basin_b(p.a))


def in_set_b(p: Params) -> bool:
    return bool(p.a <= A2 or p.b > hopf_b(p.a))


def region_membership(p: Params, tol_curve: float = 1e-9, resolve_cycles: bool = False) -> RegionReport:
    """Locate ``p`` in the parameter plane.

    Curve membership uses a band of relative width ``tol_curve`` around the Hopf
    curve.  Two-cycle region membership needs a cycle count; without
    ``resolve_cycles`` points of B\\A beyond the Bautin value are returned as
    IN_B_NOT_A with ``d_status="unresolved"``.
    """
    from .hopf import bautin_a

    a, b = p.a, p.b
    bh, ba = hopf_b(a), basin_b(a)
    by_threshold = bool(a <= A1)
    by_curve = bool(b > ba)
    in_b = in_set_b(p)
    common = dict(b_h_at_a=bh, b_a_at_a=ba, a_by_threshold=by_threshold, a_by_curve=by_curve, in_b=in_b)
    a_b = bautin_a()

    if a > A2 and abs(b - bh) <= tol_curve * max(1.0, abs(bh)):
        if abs(a - a_b) <= tol_curve * a_b:
            label = Region.AT_BAUTIN
        elif a < a_b:
            label = Region.ON_H_MINUS
        else:
            label = Region.ON_H_PLUS
        return RegionReport(label, **common)
    if by_threshold or by_curve:
        return RegionReport(Region.IN_A, **common)
    if not in_b:
        return RegionReport(Region.UNSTABLE_OUTSIDE_D, **common)
    if a <= a_b:
        return RegionReport(Region.IN_B_NOT_A, **common)
    if not resolve_cycles:
        return RegionReport(Region.IN_B_NOT_A, d_status="unresolved", **common)

    from .cycles import Stability, find_cycles_default

    cycles = find_cycles_default(p)
    n = len(cycles)
    # a small inner cycle near H+ also has a multiplier close to 1, so only a
    # lone neutral cycle or a neutral pair counts as sitting on S
    suspect = [c.stability is Stability.SEMISTABLE_SUSPECT for c in cycles]
    if (n == 1 and suspect[0]) or (n == 2 and all(suspect)):
        label = Region.ON_S_APPROX
    elif n == 2:
        label = Region.IN_D
    else:
        label = Region.IN_B_NOT_A
    return RegionReport(label, d_status="resolved", n_cycles=n, **common)


def dulac_divergence(p: Params, x: float) -> float:
    """Divergence of ``F / x``; depends on x only."""
    if not x > 0:
        raise ValueError(f"the Dulac function 1/x needs x > 0, got {x!r}")
    return p.a - p.b - 2.0 * x - p.a / (x * x)


def dulac_majorant(a: float, x):
    """Cubic ``-2x^3 + 3a^(1/3)x^2 - a``; bounds ``x^2 * dulac_divergence`` when b > basin_b(a)."""
    c = np.cbrt(a)
    return -2.0 * x ** 3 + 3.0 * c * x ** 2 - a


def dulac_certificate(p: Params, x_max: float | None = None, n_grid: int = 10_000) -> DulacCertificate:
    """Check ``dulac_divergence < 0`` on the whole half-line x > 0.

    The grid is logarithmic on ``[x_lo, x_hi]``.  Outside it the sign is known
    analytically: for x >= max(a, 1), f(x) <= a - 2x <= -x < 0, and when
    a > b, f(x) < 0 for x^2 < a / (a - b) (for a <= b, f < 0 near 0 trivially).
    """
    a, b = p.a, p.b
    x_hi = max(a, 1.0) if x_max is None else float(x_max)
    if x_hi < max(a, 1.0):
        raise ValueError("x_max must be at least max(a, 1) for the tail bound to apply")
    if a > b:
        x_lo = min(0.5 * math.sqrt(a / (a - b)), x_hi)
    else:
        x_lo = min(1e-3, x_hi)
    xs = np.geomspace(x_lo, x_hi, n_grid)
    fs = a - b - 2.0 * xs - a / (xs * xs)
    i = int(np.argmax(fs))
    worst_x, worst = float(xs[i]), float(fs[i])
    # f is concave on x > 0 with its maximum at a^(1/3); include it if it is on the grid span
    peak = float(np.cbrt(a))
    if x_lo <= peak <= x_hi:
        fpeak = a - b - 2.0 * peak - a / (peak * peak)
        if fpeak > worst:
            worst_x, worst = peak, fpeak
    return DulacCertificate(
        holds=worst < 0.0,
        worst_x=worst_x,
        worst_value=worst,
        grid=(float(x_lo), float(x_hi)),
        majorant_at_peak=float(dulac_majorant(a, peak)),
    )

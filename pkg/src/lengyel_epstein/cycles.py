"""Limit cycles through a Poincare return map on a ray from the equilibrium.

Every periodic orbit must enclose the unique equilibrium, so it crosses any
ray leaving P_a.  The default section is the horizontal ray to the right;
crossings are counted counterclockwise (y' > 0 there for every a, b).
Cycles are roots of the displacement d(s) = R(s) - s in the ray offset s.
"""

from __future__ import annotations

import enum
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .integrate import run_kernel
from .model import Params, equilibrium, hopf_b

log = logging.getLogger(__name__)

_SECTION = 5
_STATUS_REASON = {0: "budget", 1: "budget", 2: "escaped", 3: "escaped", 4: "converged"}


class NoReturn(RuntimeError):
    """The orbit did not come back to the section.

    ``reason`` is "converged", "escaped" or "budget".
    """

    def __init__(self, reason: str, s0: float, t_end: float):
        super().__init__(f"no return from offset {s0:g}: {reason} at t={t_end:g}")
        self.reason = reason
        self.s0 = s0
        self.t_end = t_end


class BracketFailure(RuntimeError):
    """No parameter interval with two cycles was found above the Hopf curve."""


class Stability(enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    SEMISTABLE_SUSPECT = "SemistableSuspect"


@dataclass(frozen=True)
class Section:
    """Ray ``origin + s * direction`` (s > 0), ``direction`` a unit vector."""

    origin: tuple[float, float]
    direction: tuple[float, float]

    @classmethod
    def horizontal(cls, p: Params) -> "Section":
        return cls(tuple(equilibrium(p)), (1.0, 0.0))

    @classmethod
    def vertical(cls, p: Params) -> "Section":
        # upward ray; counterclockwise crossings go right to left
        return cls(tuple(equilibrium(p)), (0.0, 1.0))

    def point(self, s: float) -> tuple[float, float]:
        return (self.origin[0] + s * self.direction[0], self.origin[1] + s * self.direction[1])

    def coordinate(self, s: float) -> float:
        """Position along the ray in plane units (x for the horizontal ray)."""
        return self.origin[0] * self.direction[0] + self.origin[1] * self.direction[1] + s

    def offset(self, c: float) -> float:
        return c - (self.origin[0] * self.direction[0] + self.origin[1] * self.direction[1])

    def as_tuple(self):
        return (*self.origin, *self.direction)


@dataclass(frozen=True)
class ReturnConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-15
    max_time: float = 200.0
    max_steps: int = 2_000_000
    r_escape: float = 1e6


@dataclass
class CycleInfo:
    section_x: float
    period: float
    floquet: float
    stability: Stability
    orbit: np.ndarray = field(repr=False, default_factory=lambda: np.empty((0, 3)))
    offset: float = 0.0
    floquet_divergence: float = float("nan")
    residual: float = 0.0

    def to_dict(self) -> dict:
        return {"section_x": self.section_x, "period": self.period, "floquet": self.floquet,
                "stability": self.stability.value}


def _first_return(p: Params, sec: Section, s: float, cfg: ReturnConfig, record=False):
    """Return ``(s1, period, divergence_integral, samples)`` or raise NoReturn."""
    if not s > 0:
        raise ValueError(f"section offset must be positive, got {s!r}")
    out = run_kernel(p, sec.point(s), tau_max=cfg.max_time, rtol=cfg.rel_tol, atol=cfg.abs_tol,
                     max_steps=cfg.max_steps, r_escape=cfg.r_escape, section=sec.as_tuple(),
                     sec_count=1, record=record)
    status, tau, _, _, w, _, _, _, s1, _, samples = out
    if status != _SECTION:
        raise NoReturn(_STATUS_REASON.get(status, "budget"), s, tau)
    return s1, tau, w, samples


def return_map(p: Params, x0: float, section: Section | None = None,
               cfg: ReturnConfig | None = None) -> float:
    """First counterclockwise return to the section, in section coordinates.

    ``x0`` is the ray coordinate (plain x for the default horizontal ray).
    """
    sec = section or Section.horizontal(p)
    s0 = sec.offset(x0)
    s1, _, _, _ = _first_return(p, sec, s0, cfg or ReturnConfig())
    return sec.coordinate(s1)


def displacement(p: Params, s: float, section: Section | None = None,
                 cfg: ReturnConfig | None = None) -> float:
    """``R(s) - s`` in ray offsets; raises NoReturn."""
    sec = section or Section.horizontal(p)
    s1, _, _, _ = _first_return(p, sec, s, cfg or ReturnConfig())
    return s1 - s


def classify_multiplier(m: float, tol: float = 1e-4) -> Stability:
    if m < 1.0 - tol:
        return Stability.STABLE
    if m > 1.0 + tol:
        return Stability.UNSTABLE
    return Stability.SEMISTABLE_SUSPECT


def floquet_multiplier(p: Params, c: CycleInfo, section: Section | None = None,
                       cfg: ReturnConfig | None = None, rel_step: float = 1e-6) -> float:
    """Derivative of the return map at ``c`` by central differences."""
    sec = section or Section.horizontal(p)
    cfg = cfg or ReturnConfig()
    s = c.offset if c.offset > 0 else sec.offset(c.section_x)
    h = rel_step * s
    up = _first_return(p, sec, s + h, cfg)[0]
    dn = _first_return(p, sec, s - h, cfg)[0]
    return (up - dn) / (2.0 * h)


def divergence_multiplier(p: Params, c: CycleInfo, section: Section | None = None,
                          cfg: ReturnConfig | None = None) -> float:
    """``exp`` of the divergence integral once around the cycle."""
    sec = section or Section.horizontal(p)
    s = c.offset if c.offset > 0 else sec.offset(c.section_x)
    return math.exp(_first_return(p, sec, s, cfg or ReturnConfig())[2])


def _disp_job(args):
    p, sec, s, cfg = args
    try:
        s1, _, _, _ = _first_return(p, sec, s, cfg)
        return s1 - s, None
    except NoReturn as e:
        return float("nan"), e.reason


def default_offset(p: Params) -> float:
    """Default search length along the section, ``10 (1 + a/5)``."""
    return 10.0 * (1.0 + p.a / 5.0)


def _sweep(p, sec, seeds, cfg, workers):
    jobs = [(p, sec, float(s), cfg) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            res = list(ex.map(_disp_job, jobs, chunksize=4))
    else:
        res = [_disp_job(j) for j in jobs]
    return np.array([r[0] for r in res]), [r[1] for r in res]


def _brackets(p, sec, seeds, d, cfg):
    """Sign-change brackets, plus the ones hidden between neighbouring seeds.

    Two close roots can sit between seeds without a sign change; where |d| has a
    local minimum the extremum of d is located and, if it crosses zero, both
    sides become brackets.
    """
    out = []
    f = lambda s: _disp_job((p, sec, s, cfg))[0]
    n = len(seeds)
    for i in range(n - 1):
        if np.isfinite(d[i]) and np.isfinite(d[i + 1]) and d[i] * d[i + 1] < 0:
            out.append((seeds[i], seeds[i + 1], d[i], d[i + 1]))
        elif d[i] == 0.0:
            out.append((seeds[i], seeds[i], 0.0, 0.0))
    for i in range(1, n - 1):
        dl, dm, dr = d[i - 1], d[i], d[i + 1]
        if not (np.isfinite(dl) and np.isfinite(dm) and np.isfinite(dr)):
            continue
        if dl * dm <= 0 or dm * dr <= 0:
            continue
        if not (abs(dm) < abs(dl) and abs(dm) < abs(dr)):
            continue
        sg = 1.0 if dm > 0 else -1.0
        # work in log s: seeds are geometric
        g = lambda u: sg * np.nan_to_num(f(math.exp(u)), nan=np.inf)
        lo, hi = math.log(seeds[i - 1]), math.log(seeds[i + 1])
        r = minimize_scalar(g, bounds=(lo, hi), method="bounded",
                            options={"xatol": 1e-10 * max(1.0, abs(hi))})
        if r.fun < 0:
            sm = math.exp(r.x)
            dmin = sg * r.fun
            out.append((seeds[i - 1], sm, dl, dmin))
            out.append((sm, seeds[i + 1], dmin, dr))
    return sorted(out)


def find_cycles(p: Params, x_max: float | None = None, n_seed: int = 80,
                section: Section | None = None, cfg: ReturnConfig | None = None,
                s_min: float = 1e-3, stab_tol: float = 1e-4, workers: int = 1,
                with_orbits: bool = True) -> list[CycleInfo]:
    """Locate periodic orbits as roots of the displacement on a geometric seed grid.

    Seeds run from ``s_min`` to ``x_max - x_P`` along the section.  Roots are
    refined to 1e-10, deduplicated at 1e-6 and classified by the central
    difference multiplier; seeds with no return are logged and skipped.
    """
    if n_seed < 2:
        raise ValueError("n_seed must be >= 2")
    sec = section or Section.horizontal(p)
    cfg = cfg or ReturnConfig()
    s_max = default_offset(p) if x_max is None else sec.offset(x_max)
    if not s_max > s_min:
        raise ValueError("x_max leaves no room for seeds on the section")
    seeds = np.geomspace(s_min, s_max, n_seed)
    d, why = _sweep(p, sec, seeds, cfg, workers)
    n_esc = sum(1 for w in why if w == "escaped")
    if n_esc > n_seed // 2:
        keep = [s for s, w in zip(seeds, why) if w != "escaped"]
        if keep:
            s_max = min(s_max, 1.5 * keep[-1])
            log.info("more than half the seeds escaped; shrinking s_max to %g", s_max)
            seeds = np.geomspace(s_min, s_max, n_seed)
            d, why = _sweep(p, sec, seeds, cfg, workers)
    for s, w in zip(seeds, why):
        if w is not None:
            log.debug("no return from s=%g (%s)", s, w)

    f = lambda s: _disp_job((p, sec, s, cfg))[0]
    roots = []
    for lo, hi, dlo, dhi in _brackets(p, sec, seeds, d, cfg):
        if lo == hi:
            roots.append(lo)
            continue
        try:
            roots.append(brentq(f, lo, hi, xtol=1e-10 * max(1.0, hi) * 1e-2, rtol=1e-14))
        except ValueError:
            log.warning("bracket [%g, %g] lost its sign change", lo, hi)
    roots.sort()
    uniq = []
    for r in roots:
        if not uniq or r - uniq[-1] > 1e-6:
            uniq.append(r)

    out = []
    for s in uniq:
        s1, period, w, samples = _first_return(p, sec, s, cfg, record=with_orbits)
        c = CycleInfo(section_x=sec.coordinate(s), period=period, floquet=float("nan"),
                      stability=Stability.SEMISTABLE_SUSPECT, offset=s,
                      floquet_divergence=math.exp(w), residual=s1 - s)
        if samples is not None:
            c.orbit = np.asarray(samples, dtype=float).reshape(-1, 3)
        c.floquet = floquet_multiplier(p, c, sec, cfg)
        c.stability = classify_multiplier(c.floquet, stab_tol)
        out.append(c)
    return out


def find_cycles_default(p: Params, n_seed: int = 80, section: Section | None = None,
                        cfg: ReturnConfig | None = None, workers: int = 1,
                        with_orbits: bool = False) -> list[CycleInfo]:
    """find_cycles with the default bound, doubled while the outermost seed still moves outward."""
    sec = section or Section.horizontal(p)
    cfg = cfg or ReturnConfig()
    s_max = default_offset(p)
    for _ in range(4):
        try:
            d_edge = displacement(p, s_max, sec, cfg)
        except NoReturn:
            break
        if d_edge <= 0:
            break
        s_max *= 2.0
    return find_cycles(p, sec.coordinate(s_max), n_seed, sec, cfg, workers=workers,
                       with_orbits=with_orbits)


def count_cycles(p: Params, section: Section | None = None, **kw) -> int:
    return len(find_cycles_default(p, section=section, **kw))


def semistable_bracket(a: float, tol_b: float = 1e-4, b_step: float = 0.5,
                       b_max: float | None = None, counter=None) -> tuple[float, float]:
    """Bisect b on ``count_cycles >= 2``; returns ``(b_lo, b_hi)`` with hi - lo <= tol_b.

    ``count(b_lo) >= 2`` and ``count(b_hi) == 0``.
    """
    from .hopf import bautin_a

    if not a > bautin_a():
        raise ValueError(f"a must exceed the Bautin value {bautin_a():.6f}")
    if not tol_b > 0:
        raise ValueError("tol_b must be positive")
    counter = counter or (lambda b: count_cycles(Params(a, b)))
    bh = hopf_b(a)
    b_max = b_max if b_max is not None else bh + 10.0
    lo = None
    for delta in (1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6, 1e-6):
        if counter(bh + delta) >= 2:
            lo = bh + delta
            break
    if lo is None:
        raise BracketFailure(f"no two-cycle parameter found just above b_H({a:g}) = {bh:.6f}")
    hi = lo
    while True:
        hi = min(hi + b_step, b_max)
        n = counter(hi)
        if n == 0:
            break
        if n >= 2:
            lo = hi
        if hi >= b_max:
            raise BracketFailure(f"cycles persist up to b = {b_max:g} at a = {a:g}")
    while hi - lo > tol_b:
        mid = 0.5 * (lo + hi)
        n = counter(mid)
        if n >= 2:
            lo = mid
        elif n == 0:
            hi = mid
        else:
            # one cycle: a fold seen from the side; treat as past S
            log.info("single cycle at b=%.8f during bisection", mid)
            hi = mid
    return lo, hi


def semistable_b(a: float, tol_b: float = 1e-4, **kw) -> float:
    """Midpoint of :func:`semistable_bracket`."""
    lo, hi = semistable_bracket(a, tol_b, **kw)
    return 0.5 * (lo + hi)


def cycles_to_json(cycles: list[CycleInfo]) -> str:
    return json.dumps([c.to_dict() for c in cycles], indent=2, sort_keys=True)

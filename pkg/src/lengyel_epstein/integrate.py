"""Orbit integration, fate classification and the basin/escape experiments."""

from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from .model import Params, State, classify_equilibrium, equilibrium

DEFAULT_ESCAPE_CANDIDATES = (
    State(-1.0, -10.0),
    State(-5.0, -50.0),
    State(-10.0, -1.0),
    State(-0.5, -100.0),
)

_TIME, _STEPS, _ESCAPED, _OVERFLOW, _CONVERGED, _SECTION = range(6)


class Fate(enum.Enum):
    CONVERGED = "ConvergedToEquilibrium"
    ESCAPED = "Escaped"
    SUSPECTED_CYCLE = "SuspectedCycle"
    BUDGET = "BudgetExhausted"


class NoWitness(RuntimeError):
    """No candidate initial condition produced an escaping orbit."""


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_time: float = 1e4
    max_steps: int = 10_000_000
    r_escape: float = 1e6
    tol_conv: float = 1e-8

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_time", "max_steps", "r_escape", "tol_conv"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.rel_tol > 1e-3 or self.abs_tol > 1e-3:
            raise ValueError("rel_tol and abs_tol must not exceed 1e-3")


@dataclass
class Orbit:
    t: np.ndarray
    xy: np.ndarray
    fate: Fate
    t_end: float
    final_state: State
    escape_radius_hit: float | None = None
    overflow: bool = False
    n_steps: int = 0
    n_rejected: int = 0
    divergence_integral: float = 0.0
    meta: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "y"])
            for t, (x, y) in zip(self.t, self.xy):
                w.writerow([repr(float(t)), repr(float(x)), repr(float(y))])


def convergence_dwell(p: Params, max_time: float) -> float:
    """One characteristic time ``1/|Re lambda|`` at the equilibrium, capped."""
    rep = classify_equilibrium(p)
    re = max(abs(z.real) for z in rep.eigenvalues)
    cap = max_time / 10.0
    return cap if re == 0.0 else min(1.0 / re, cap)


def run_kernel(p: Params, s0, *, tau_max, rtol, atol, max_steps, r_escape,
               tol_conv=0.0, dwell=0.0, section=None, sec_count=0,
               direction=1.0, record=False, kernel=None):
    """Thin wrapper over the flow kernel; ``section`` is ``(px, py, dx, dy)``."""
    k = _backend.kernel if kernel is None else kernel
    x0, y0 = float(s0[0]), float(s0[1])
    cx, cy = equilibrium(p)
    spx, spy, sdx, sdy = section if section is not None else (0.0, 0.0, 0.0, 0.0)
    return k.flow(p.a, p.b, x0, y0, float(tau_max), float(rtol), float(atol), int(max_steps),
                  float(r_escape), cx, cy, float(tol_conv), float(dwell),
                  float(spx), float(spy), float(sdx), float(sdy), int(sec_count),
                  float(direction), bool(record))


def integrate(p: Params, s0, cfg: IntegratorConfig | None = None, *, record: bool = True,
              direction: float = 1.0, kernel=None) -> Orbit:
    """Integrate from ``s0`` until convergence, escape or budget.

    Convergence means the orbit stayed within ``cfg.tol_conv`` of the
    equilibrium for one characteristic time.  Orbits that exhaust the budget
    while returning to the horizontal ray through the equilibrium at a fixed
    position are flagged SUSPECTED_CYCLE.  ``direction=-1`` integrates
    backward in time (the returned times are then non-positive).
    """
    cfg = cfg or IntegratorConfig()
    x0, y0 = float(s0[0]), float(s0[1])
    if not (math.isfinite(x0) and math.isfinite(y0)):
        raise ValueError("initial state must be finite")
    xp, yp = equilibrium(p)
    dwell = convergence_dwell(p, cfg.max_time)
    out = run_kernel(
        p, (x0, y0), tau_max=cfg.max_time, rtol=cfg.rel_tol, atol=cfg.abs_tol,
        max_steps=cfg.max_steps, r_escape=cfg.r_escape,
        tol_conv=cfg.tol_conv if direction > 0 else 0.0, dwell=dwell,
        section=(xp, yp, 1.0, 0.0), sec_count=0, direction=direction,
        record=record, kernel=kernel,
    )
    status, tau, x, y, w, n_acc, n_rej, n_cross, s_last, s_prev, samples = out
    sgn = 1.0 if direction > 0 else -1.0
    if samples is not None:
        arr = np.asarray(samples, dtype=float).reshape(-1, 3)
        t, xy = sgn * arr[:, 0], arr[:, 1:]
    else:
        t = np.array([0.0, sgn * tau])
        xy = np.array([[x0, y0], [x, y]])

    escape_hit = None
    overflow = False
    if status == _CONVERGED:
        fate = Fate.CONVERGED
    elif status == _ESCAPED:
        fate = Fate.ESCAPED
        escape_hit = float(math.hypot(x, y))
    elif status == _OVERFLOW:
        fate = Fate.ESCAPED
        overflow = True
        escape_hit = float(math.hypot(x, y))
    elif n_cross >= 3 and abs(s_last - s_prev) <= 1e-4 * max(1.0, abs(s_last)):
        fate = Fate.SUSPECTED_CYCLE
    else:
        fate = Fate.BUDGET
    return Orbit(
        t=t, xy=xy, fate=fate, t_end=float(sgn * tau), final_state=State(float(x), float(y)),
        escape_radius_hit=escape_hit, overflow=overflow, n_steps=int(n_acc),
        n_rejected=int(n_rej), divergence_integral=float(w),
        meta={"status": int(status), "crossings": int(n_cross), "backend": _backend.BACKEND},
    )


@dataclass
class InvarianceReport:
    n_orbits: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_invariance(p: Params, n_samples: int, cfg: IntegratorConfig | None = None,
                      seed: int = 0, slack: float = 1e-9, initial=None) -> InvarianceReport:
    """Check that the open first quadrant and the half-plane x > 0 are forward invariant.

    Half the initial conditions are drawn in the quadrant and half in the
    half-plane with y <= 0 (plus any explicit ``initial`` states).  A violation
    is any recorded sample leaving the region by more than ``slack``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    cfg = cfg or IntegratorConfig(max_time=20.0)
    rng = np.random.default_rng(seed)
    starts = []
    for i in range(n_samples):
        x = float(rng.uniform(1e-3, 3.0 * p.a + 5.0))
        if i % 2 == 0:
            starts.append(("Q1", State(x, float(rng.uniform(1e-3, 60.0)))))
        else:
            starts.append(("x>0", State(x, float(rng.uniform(-60.0, 0.0)))))
    for s in initial or ():
        starts.append(("Q1" if s[1] > 0 else "x>0", State(*s)))
    rep = InvarianceReport(n_orbits=len(starts))
    for region, s in starts:
        orb = integrate(p, s, cfg)
        xs, ys = orb.xy[:, 0], orb.xy[:, 1]
        bad = xs <= -slack
        if region == "Q1":
            bad |= ys <= -slack
        if bad.any():
            j = int(np.argmax(bad))
            rep.violations.append({"region": region, "start": tuple(s), "t": float(orb.t[j]),
                                   "state": (float(xs[j]), float(ys[j]))})
    return rep


@dataclass
class BasinScanResult:
    converged: int
    escaped: int
    other: int
    failures: list
    total: int
    max_final_distance: float


def _fate_of(args):
    p, s, cfg = args
    orb = integrate(p, s, cfg, record=False)
    return orb.fate, orb.final_state


def basin_scan(p: Params, x_range=(0.1, 50.0), y_range=(-50.0, 50.0), nx: int = 10, ny: int = 10,
               cfg: IntegratorConfig | None = None, workers: int = 1, points=None) -> BasinScanResult:
    """Integrate from a regular grid (or explicit ``points``) and tally fates."""
    cfg = cfg or IntegratorConfig()
    if points is None:
        if x_range[0] <= 0:
            raise ValueError("the scan grid must lie in the half-plane x > 0")
        xs = np.linspace(x_range[0], x_range[1], nx)
        ys = np.linspace(y_range[0], y_range[1], ny)
        points = [State(float(x), float(y)) for x in xs for y in ys]
    jobs = [(p, State(*s), cfg) for s in points]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_fate_of, jobs, chunksize=4))
    else:
        results = [_fate_of(j) for j in jobs]
    xp, yp = equilibrium(p)
    conv = esc = other = 0
    failures = []
    dmax = 0.0
    for (_, s, _), (fate, fin) in zip(jobs, results):
        if fate is Fate.CONVERGED:
            conv += 1
            dmax = max(dmax, math.hypot(fin.x - xp, fin.y - yp))
        else:
            if fate is Fate.ESCAPED:
                esc += 1
            else:
                other += 1
            failures.append({"start": tuple(s), "fate": fate.value, "final": tuple(fin)})
    return BasinScanResult(conv, esc, other, failures, len(jobs), dmax)


def escape_search(p: Params, candidates=DEFAULT_ESCAPE_CANDIDATES,
                  cfg: IntegratorConfig | None = None) -> tuple[State, Orbit]:
    """Return the first candidate whose forward orbit escapes, with its orbit."""
    if not candidates:
        raise ValueError("candidate list is empty")
    cfg = cfg or IntegratorConfig(max_time=100.0)
    for s in candidates:
        orb = integrate(p, s, cfg)
        if orb.fate is Fate.ESCAPED:
            return State(*s), orb
    raise NoWitness(f"no escaping orbit among {len(candidates)} candidates for {p}")


"""Compare the compiled flow kernel with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each workload is timed with both kernels; the table reports the best of
``--repeat`` runs, the speed-up, and the largest state difference.
"""

import argparse
import time

import numpy as np

from lengyel_epstein import _backend
from lengyel_epstein.cycles import ReturnConfig, Section
from lengyel_epstein.integrate import IntegratorConfig, integrate, run_kernel
from lengyel_epstein.model import Params


def orbit_job(kernel):
    o = integrate(Params(5, 1), (0.5, 1.0), kernel=kernel)
    return o.n_steps, np.array(o.final_state)


def cycle_job(kernel):
    o = integrate(Params(24.712, 13.85), (7.0, 20.0), IntegratorConfig(max_time=20.0), kernel=kernel)
    return o.n_steps, np.array(o.final_state)


def return_job(kernel):
    p = Params(24.712, 13.85)
    sec, cfg = Section.horizontal(p), ReturnConfig()
    s1 = []
    for s in np.linspace(0.5, 3.0, 20):
        out = run_kernel(p, sec.point(s), tau_max=cfg.max_time, rtol=cfg.rel_tol, atol=cfg.abs_tol,
                         max_steps=cfg.max_steps, r_escape=cfg.r_escape, section=sec.as_tuple(),
                         sec_count=1, kernel=kernel)
        s1.append(out[8])
    return 20, np.array(s1)


WORKLOADS = {
    "basin orbit (5,1)": orbit_job,
    "20 time units on a cycle": cycle_job,
    "20 return-map evaluations": return_job,
}


def best_time(fn, kernel, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = fn(kernel)
        best = min(best, time.perf_counter() - t0)
    return best, res


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _backend.HAVE_COMPILED:
        raise SystemExit("compiled kernel not built; run `pip install --no-build-isolation -e .` first")
    ck, pk = _backend.get_kernel("compiled"), _backend.get_kernel("python")
    print(f"{'workload':28s} {'compiled s':>11s} {'python s':>10s} {'speed-up':>9s} {'max diff':>9s}")
    for name, fn in WORKLOADS.items():
        tc, (_, rc) = best_time(fn, ck, args.repeat)
        tp, (_, rp) = best_time(fn, pk, max(1, args.repeat // 2))
        diff = float(np.abs(rc - rp).max())
        print(f"{name:28s} {tc:11.4f} {tp:10.3f} {tp / tc:8.0f}x {diff:9.1e}")


if __name__ == "__main__":
    main()

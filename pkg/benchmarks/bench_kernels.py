"""Compare the numba kernels against the pure-numpy fallback.

Run directly:

    python3 benchmarks/bench_kernels.py

The script re-executes itself once per backend (the choice is frozen at
import time by BUBBLETK_NO_NUMBA), checks that both backends produce the
same counts, and prints a timing table.  Wall times include neither JIT
compilation nor RNG block generation; each kernel is warmed once and then
timed over repeated calls on the same arrays.
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

REPEATS = 5
VOLUME_SAMPLES = 2_000_000
INTERFACE_SAMPLES = 500_000


def _workload():
    import bubbletk as bt
    from bubbletk import _kernels, measure, rng

    cl = bt.bubble_from_curvatures(3, 4, np.array([0.25, 0.05, -0.1, -0.2]))
    pts = np.concatenate([
        rng.sphere_block(9, b, m, cl.n + 1)
        for b, m in enumerate(rng.block_sizes(VOLUME_SAMPLES))
    ])

    def counts():
        return _kernels.sphere_cell_counts(pts, cl.centers, cl.curvatures)

    def assign():
        return _kernels.sphere_assign(pts, cl.centers, cl.curvatures)[0]

    def volumes():
        return [r.value for r in measure.cell_volumes(cl, samples=VOLUME_SAMPLES,
                                                      seed=9)]

    def perims():
        return measure.perimeter(cl, samples=INTERFACE_SAMPLES, seed=9).total.value

    out = {"backend": _kernels.backend_name(), "timings": {}, "results": {}}
    for name, fn in (("sphere_cell_counts", counts), ("sphere_assign", assign),
                     ("cell_volumes", volumes), ("perimeter", perims)):
        fn()  # warm: JIT compile, allocate
        best = np.inf
        for _ in range(REPEATS):
            t0 = time.perf_counter()
            r = fn()
            best = min(best, time.perf_counter() - t0)
        out["timings"][name] = best
        out["results"][name] = np.asarray(r, dtype=float).ravel()[:8].tolist()
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--inner", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.inner:
        json.dump(_workload(), sys.stdout)
        return

    here = os.path.abspath(__file__)
    runs = {}
    for label, env_val in (("numba", ""), ("numpy", "1")):
        env = dict(os.environ, BUBBLETK_NO_NUMBA=env_val)
        proc = subprocess.run([sys.executable, here, "--inner"], env=env,
                              capture_output=True, text=True, check=True)
        runs[label] = json.loads(proc.stdout)
        assert runs[label]["backend"] == label, runs[label]["backend"]

    for name in runs["numba"]["results"]:
        a = np.array(runs["numba"]["results"][name])
        b = np.array(runs["numpy"]["results"][name])
        if not np.array_equal(a, b):
            print(f"MISMATCH in {name}: {a} vs {b}", file=sys.stderr)
            sys.exit(1)

    print(f"{VOLUME_SAMPLES:,} volume samples, {INTERFACE_SAMPLES:,} per "
          f"interface, best of {REPEATS}\n")
    print(f"{'kernel':<20}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for name, t_nb in runs["numba"]["timings"].items():
        t_np = runs["numpy"]["timings"][name]
        print(f"{name:<20}{t_nb * 1e3:>10.1f}ms{t_np * 1e3:>10.1f}ms"
              f"{t_np / t_nb:>9.1f}x")
    print("\nbackends agree on all spot-checked results")


if __name__ == "__main__":
    main()

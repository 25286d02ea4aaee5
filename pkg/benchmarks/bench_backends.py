"""Time the numba kernels against the numpy/scipy fallback.

Each backend runs in its own interpreter because LG_BACKEND is read at import.

    python3 benchmarks/bench_backends.py [--sizes 64 128 256] [--repeat 3]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from lgobstacle._backend import BACKEND
from lgobstacle.grid import ScalarField, build_domain
from lgobstacle.kernels import build_csr, enumerate_cut_costs
from lgobstacle.perimeter import make_stencil
from lgobstacle.solver import make_ladder, solve

sizes = json.loads(sys.argv[1])
repeat = int(sys.argv[2])
rows = []


def best(fn):
    fn()  # warm-up (compilation, caches)
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    return min(ts)


for n in sizes:
    d = build_domain({"kind": "disc", "radius": 1.0, "h": 2 / n, "collar": 3})
    X, Y = d.coords()
    th = np.arctan2(Y, X)
    g = ScalarField(d, np.where(d.ring, np.round(np.cos(3 * th), 1), np.nan), "ring")
    st = make_stencil(16, d.h)
    lad = make_ladder(g)
    rows.append({"task": f"solve disc {n}x{n}, {lad.m} levels", "seconds": best(lambda: solve(d, g, None, st, lad, workers=1))})

rng = np.random.default_rng(0)
nf = 20
pairs = [(i, j) for i in range(nf) for j in range(i + 1, nf) if rng.random() < 0.2]
tail = np.array([x for a, b in pairs for x in (a, b)], np.int64)
head = np.array([x for a, b in pairs for x in (b, a)], np.int64)
cap = np.repeat(rng.integers(1, 100, len(pairs)), 2).astype(np.int64)
start, adj = build_csr(tail, nf)
src = rng.integers(0, 50, nf).astype(np.int64)
snk = rng.integers(0, 50, nf).astype(np.int64)
rows.append({"task": f"enumerate 2^{nf} cuts", "seconds": best(lambda: enumerate_cut_costs(nf, start, adj, head, cap, src, snk, 0))})
print(json.dumps({"backend": BACKEND, "rows": rows}))
"""


def run(backend, sizes, repeat):
    env = dict(os.environ, LG_BACKEND=backend, LG_THREADS="1")
    r = subprocess.run([sys.executable, "-c", WORKER, json.dumps(sizes), str(repeat)], env=env, capture_output=True, text=True)
    if r.returncode:
        raise SystemExit(r.stderr)
    return json.loads(r.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    res = {be: run(be, args.sizes, args.repeat) for be in ("numba", "numpy")}
    print(f"{'task':40s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for a, b in zip(res["numba"]["rows"], res["numpy"]["rows"]):
        print(f"{a['task']:40s} {a['seconds']:10.3f} {b['seconds']:10.3f} {b['seconds'] / a['seconds']:8.1f}")


if __name__ == "__main__":
    main()

"""Compare the numba kernels with the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--repeat R]

Kernel timings call both backends directly in one process.  The end-to-end
row runs ``covlab analyze`` in a subprocess per backend, with COVLAB_NO_JIT
selecting the fallback.
"""

import argparse
import os
import subprocess
import sys
import tempfile
import time

import numpy as np

from covlab import _kernels as K
from covlab import make_field, parse

CUBE = """covlab-format 1
[field F]
gf = GF(7)
[variety A1]
field = F
ambient = affine 1
dim = 1
[cover cube]
source = A1
target = A1
map = [x0^3 + 2*x0]
degree = 3
"""


def best_of(fn, repeat):
    fn()  # warmup, includes JIT compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases():
    F = make_field(3, 4)
    p, k, mod = F.kparams
    rng = np.random.default_rng(1)
    a = rng.integers(0, F.q, 200_000)
    b = rng.integers(0, F.q, 200_000)
    f = parse("x0^5*x1 + 2*x1^3*x2^2 + x0*x1*x2 + 1", 3, F)
    exps, coeffs = f.kernel_arrays()
    pts = rng.integers(0, F.q, (100_000, 3))
    mats = rng.integers(0, F.q, (20_000, 3, 4))
    nb, npb = K.numba_backend, K.numpy_backend
    return [
        ("mul 2e5 in GF(3^4)", lambda: nb.mul_flat(a, b, p, k, mod), lambda: npb.mul(a, b, p, k, mod)),
        ("eval_poly 1e5 points", lambda: nb.eval_poly(pts, exps, coeffs, p, k, mod),
         lambda: npb.eval_poly(pts, exps, coeffs, p, k, mod)),
        ("batch_rank 2e4 3x4", lambda: nb.batch_rank(mats, p, k, mod), lambda: npb.batch_rank(mats, p, k, mod)),
    ]


def end_to_end(backend_env, path, max_ext):
    env = dict(os.environ, COVLAB_NO_JIT=backend_env)
    cmd = [sys.executable, "-m", "covlab.cli", "analyze", path, "--max-ext", str(max_ext), "--format", "csv"]
    subprocess.run(cmd, env=env, check=True, capture_output=True)  # warm the numba cache
    t0 = time.perf_counter()
    subprocess.run(cmd, env=env, check=True, capture_output=True)
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--max-ext", type=int, default=6)
    args = ap.parse_args()
    if K.numba_backend is None:
        sys.exit("numba is not importable; nothing to compare")
    print(f"{'case':28s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for label, fast, slow in kernel_cases():
        if not np.array_equal(fast(), slow()):
            sys.exit(f"backends disagree on {label}")
        tf, ts = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{label:28s} {tf:10.4f} {ts:10.4f} {ts / tf:8.1f}")
    with tempfile.NamedTemporaryFile("w", suffix=".cov", delete=False) as fh:
        fh.write(CUBE)
    try:
        tf, ts = end_to_end("0", fh.name, args.max_ext), end_to_end("1", fh.name, args.max_ext)
    finally:
        os.unlink(fh.name)
    print(f"{'analyze GF(7), M=' + str(args.max_ext):28s} {tf:10.4f} {ts:10.4f} {ts / tf:8.1f}")


if __name__ == "__main__":
    main()

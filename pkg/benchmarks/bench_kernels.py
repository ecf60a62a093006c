"""Compare the compiled and numpy Monte Carlo kernels.

Times each inner-loop kernel on identical inputs under both backends, then
times one end-to-end kernel_apply_mc call per backend in a fresh process
(the backend is fixed at import). Usage::

    python3 benchmarks/bench_kernels.py --size 32768 --repeat 7
"""
import argparse
import os
import statistics
import subprocess
import sys
import timeit

import numpy as np

from crsphere import kernels

END_TO_END = (
    "import time\n"
    "from crsphere.sphere import HarmonicExpansion, SampleSpec, kernel_apply_mc\n"
    "from crsphere.spectrum import SphereGeometry\n"
    "g = SphereGeometry(2)\n"
    "f = HarmonicExpansion.parse('const:1+mono:0.5,2,1,1,2+mono:0.3,1,0,3,3')\n"
    "spec = SampleSpec(seed=1, count={count})\n"
    "t = time.perf_counter()\n"
    "kernel_apply_mc(g, 2.0, f, [1, 0, 0], spec)\n"
    "print(time.perf_counter() - t)\n"
)


def kernel_inputs(size, m=3, seed=0):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((size, m, 2))
    pts = kernels.load_backend("python").gaussian_to_sphere(z)
    xi = np.ascontiguousarray(pts)
    u = rng.random((size, 5))
    w = 0.9 * pts[:, 0]
    rad = np.sqrt(1 - np.abs(w) ** 2)
    coef = np.array([1.0, 0.5 + 0.2j, 0.3], dtype=complex)
    jz, kz = np.array([0, 2, 1]), np.array([0, 1, 0])
    az, ab = np.array([0, 0, 2]), np.array([0, 1, 2])
    zc = np.array([0.5, 0.1j, 0.0])
    return {
        "gaussian_to_sphere": (z,),
        "zonal_proposal": (u, m - 1, 2.0, 1.0, 0.2),
        "complement_lift": (xi, w, rad, rng.standard_normal((size, m, 2))),
        "eval_monomials": (pts, coef, jz, kz, az, ab),
        "abs_power": (pts, zc, -3.0),
    }


def time_call(fn, args, repeat):
    runs = timeit.repeat(lambda: fn(*args), number=1, repeat=repeat)
    return statistics.median(runs)


def end_to_end(backend, count):
    env = {**os.environ, "CRS_BACKEND": backend, "CRS_THREADS": "1"}
    out = subprocess.run([sys.executable, "-c", END_TO_END.format(count=count)],
                         env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1 << 15, help="points per kernel call")
    ap.add_argument("--repeat", type=int, default=7)
    ap.add_argument("--samples", type=int, default=400_000,
                    help="sample count for the end-to-end run")
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy backend is available")
    mods = {name: kernels.load_backend(name) for name in backends}
    inputs = kernel_inputs(args.size)

    header = f"{'kernel':<20}" + "".join(f"{b + ' ms':>12}" for b in backends)
    print(header + (f"{'speedup':>10}" if len(backends) == 2 else ""))
    for name, call_args in inputs.items():
        times = {b: time_call(getattr(m, name), call_args, args.repeat) for b, m in mods.items()}
        line = f"{name:<20}" + "".join(f"{times[b] * 1e3:>12.3f}" for b in backends)
        if len(backends) == 2:
            line += f"{times['python'] / times['cython']:>9.2f}x"
        print(line)

    print(f"\nkernel_apply_mc, n=2, {args.samples} samples, one thread:")
    for b in backends:
        print(f"  {b:<8} {end_to_end(b, args.samples):.3f} s")


if __name__ == "__main__":
    main()

"""Compiled vs numpy kernels, plus one end-to-end W1 solve for scale.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""

import argparse
import json
import platform
import timeit

import numpy as np

from aiid import kernels
from aiid import tensor, w1


def _best(fn, repeat):
    fn()  # warm up
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_transforms(sizes, repeat):
    rows = []
    rng = np.random.default_rng(0)
    for n in sizes:
        table = rng.standard_normal(2**n)
        for name, fn in (("moebius", kernels.moebius_transform), ("zeta", kernels.zeta_transform)):
            ref = fn(table, backend="python")
            out = fn(table, backend="cython")
            assert np.allclose(out, ref, atol=1e-9 * max(1.0, np.abs(ref).max()))
            py = _best(lambda: fn(table, backend="python"), repeat)
            cy = _best(lambda: fn(table, backend="cython"), repeat)
            rows.append({"kernel": name, "size": f"n={n}", "python_s": py, "cython_s": cy})
    return rows


def bench_hamming(shapes, n, repeat):
    rows = []
    rng = np.random.default_rng(1)
    for a, b in shapes:
        left = rng.integers(0, 2**n, a)
        right = rng.integers(0, 2**n, b)
        ref = kernels.hamming_matrix(left, right, n, 2, backend="python")
        assert np.array_equal(kernels.hamming_matrix(left, right, n, 2, backend="cython"), ref)
        py = _best(lambda: kernels.hamming_matrix(left, right, n, 2, backend="python"), repeat)
        cy = _best(lambda: kernels.hamming_matrix(left, right, n, 2, backend="cython"), repeat)
        rows.append({"kernel": "hamming", "size": f"{a}x{b}, n={n}", "python_s": py, "cython_s": cy})
    return rows


def bench_sdp(n_sites):
    rho = tensor.random_density(n_sites, 2, 11)
    sigma = tensor.random_density(n_sites, 2, 12)
    return _best(lambda: w1.w1_primal(rho, sigma), 1)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the rows here")
    args = ap.parse_args(argv)
    if kernels.BACKEND != "cython":
        raise SystemExit("compiled kernels not built; run pip install --no-build-isolation -e . first")

    rows = bench_transforms((10, 14, 18, 20), args.repeat)
    rows += bench_hamming(((64, 64), (512, 512), (1024, 2048)), 12, args.repeat)
    print(f"{'kernel':8s} {'size':20s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    for r in rows:
        r["speedup"] = r["python_s"] / r["cython_s"]
        print(f"{r['kernel']:8s} {r['size']:20s} {r['python_s'] * 1e3:8.2f}ms {r['cython_s'] * 1e3:8.2f}ms "
              f"{r['speedup']:7.1f}x")

    sdp = {n: bench_sdp(n) for n in (2, 3)}
    for n, t in sdp.items():
        print(f"w1_primal n={n}: {t * 1e3:.0f}ms (conic solver, no kernel involvement)")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"python": platform.python_version(), "rows": rows,
                       "w1_primal_s": {str(k): v for k, v in sdp.items()}}, fh, indent=2)


if __name__ == "__main__":
    main()

"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 4 8 16] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from groupoidal import _pykernels
from groupoidal.core import pair_groupoid
from groupoidal.examples import build_eprb
from groupoidal.independence import check_generalized_independence

try:
    from groupoidal import _ckernels
except ImportError:
    _ckernels = None


def _best(fn, repeat):
    t = timeit.Timer(fn)
    number, _ = t.autorange()
    return min(t.repeat(repeat, number)) / number


def bench_size(n, repeat, rng):
    g = pair_groupoid(n)
    size = len(g)
    ii, jj, kk = (np.ascontiguousarray(x, dtype=np.intp) for x in g.composable_pairs)
    inv = np.ascontiguousarray(g.inv_positions, dtype=np.intp)
    comp = np.ascontiguousarray(g.comp_matrix, dtype=np.intp)
    f = rng.normal(size=size) + 1j * rng.normal(size=size)
    h = rng.normal(size=size) + 1j * rng.normal(size=size)
    F = np.ascontiguousarray(rng.normal(size=(256, size)) + 0j)
    H = np.ascontiguousarray(rng.normal(size=(256, size)) + 0j)
    a = np.arange(0, size, 2, dtype=np.intp)
    b = np.arange(1, size, 2, dtype=np.intp)
    cases = {
        "convolve": lambda m: m.convolve(f, h, ii, jj, kk, size),
        "convolve_many x256": lambda m: m.convolve_many(F, H, ii, jj, kk, size),
        "gram": lambda m: m.gram(f, inv, comp),
        "decoherence_sum": lambda m: m.decoherence_sum(f, inv, comp, a, b),
    }
    rows = []
    for name, call in cases.items():
        tp = _best(lambda: call(_pykernels), repeat)
        tc = _best(lambda: call(_ckernels), repeat) if _ckernels else float("nan")
        rows.append((f"A{n} ({size} transitions)", name, tp, tc))
    return rows


def bench_search(repeat):
    sys_ = build_eprb()
    from groupoidal import kernels

    out = []
    for backend, mod in (("python", _pykernels), ("cython", _ckernels)):
        if mod is None:
            continue
        saved = kernels._impl
        kernels._impl = mod
        try:
            t = _best(lambda: check_generalized_independence(
                sys_.family, [sys_.rho0], trials=2000, basis_seeds=False, tol=1e9), repeat)
        finally:
            kernels._impl = saved
        out.append((backend, t))
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'groupoid':<24}{'kernel':<22}{'python':>12}{'cython':>12}{'speedup':>10}")
    for n in args.sizes:
        for gname, kname, tp, tc in bench_size(n, args.repeat, rng):
            print(f"{gname:<24}{kname:<22}{tp * 1e6:>10.1f}us{tc * 1e6:>10.1f}us{tp / tc:>9.1f}x")
    print()
    print("EPRB random search, 2000 centred words (tolerance disabled):")
    for backend, t in bench_search(args.repeat):
        print(f"  {backend:<8}{t * 1e3:8.1f} ms")


if __name__ == "__main__":
    main()

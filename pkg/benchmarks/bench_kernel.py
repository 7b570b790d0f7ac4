"""Compare the compiled polynomial kernel with the pure-Python fallback.

Two measurements per backend:

* micro: ``poly_mul`` and ``poly_partial`` on random sparse polynomials,
  calling each kernel module directly;
* pipeline: ``noether2 verify`` on a corpus problem, run in a fresh
  interpreter with ``NOETHER2_PURE_PYTHON`` set or unset.

Usage::

    python3 benchmarks/bench_kernel.py [--repeat 5] [--problem shallow_water]
"""

import argparse
import os
import random
import subprocess
import sys
import timeit
from importlib import resources

from gmpy2 import mpq

from noether2 import _pykernel

try:
    from noether2 import _ckernel
except ImportError:  # extension not built
    _ckernel = None


def random_poly(rng, nterms, natoms=16, maxdeg=3):
    p = {}
    for _ in range(nterms):
        ids = sorted(rng.sample(range(1, natoms), rng.randint(1, 4)))
        mono = []
        for i in ids:
            mono += [i, rng.randint(1, maxdeg)]
        p[tuple(mono)] = mpq(rng.randint(-9, 9) or 1, rng.randint(1, 5))
    return p


def micro(mod, repeat):
    rng = random.Random(0)
    pairs = [(random_poly(rng, 60), random_poly(rng, 60)) for _ in range(20)]

    def work():
        for p, q in pairs:
            r = mod.poly_mul(p, q)
            mod.poly_partial(r, 3)

    return min(timeit.repeat(work, number=5, repeat=repeat)) / 5


def pipeline(problem, pure, repeat):
    path = str(resources.files("noether2") / "corpus" / f"{problem}.n2")
    env = dict(os.environ)
    env.pop("NOETHER2_PURE_PYTHON", None)
    if pure:
        env["NOETHER2_PURE_PYTHON"] = "1"
    code = (
        "import time, sys\n"
        "from noether2.cli import main\n"
        "import io, contextlib\n"
        "t = time.perf_counter()\n"
        "with contextlib.redirect_stdout(io.StringIO()):\n"
        f"    main(['verify', {path!r}])\n"
        "print(time.perf_counter() - t)\n"
    )
    times = []
    for _ in range(repeat):
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        times.append(float(out.stdout.strip()))
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--problem", default="shallow_water")
    args = ap.parse_args(argv)

    rows = [("micro poly_mul+partial", micro(_pykernel, args.repeat),
             micro(_ckernel, args.repeat) if _ckernel else None)]
    rows.append((f"verify {args.problem}", pipeline(args.problem, True, args.repeat),
                 pipeline(args.problem, False, args.repeat) if _ckernel else None))

    print(f"{'workload':<28}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for name, py, cy in rows:
        if cy is None:
            print(f"{name:<28}{py:>12.4f}{'n/a':>12}{'':>10}")
        else:
            print(f"{name:<28}{py:>12.4f}{cy:>12.4f}{py / cy:>9.2f}x")


if __name__ == "__main__":
    main()

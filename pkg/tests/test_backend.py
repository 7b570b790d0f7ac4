import random

import pytest
from gmpy2 import mpq

from noether2 import _pykernel as py
from noether2 import kernel

ck = pytest.importorskip("noether2._ckernel", reason="compiled kernel not built")


def _mono(rng):
    ids = sorted(rng.sample(range(0, 12), rng.randint(0, 4)))
    out = []
    for i in ids:
        out += [i, rng.choice([-2, -1, 1, 2, 3])]
    return tuple(out)


def _poly(rng, n=6):
    p = {}
    for _ in range(n):
        c = mpq(rng.randint(-5, 5), rng.randint(1, 4))
        if c:
            p[_mono(rng)] = c
    return p


def test_backend_flag():
    assert kernel.BACKEND in ("cython", "python")


def test_mono_mul_parity():
    rng = random.Random(0)
    for _ in range(500):
        a, b = _mono(rng), _mono(rng)
        assert py.mono_mul(a, b) == ck.mono_mul(a, b)


def test_imaginary_unit_reduction():
    for k in range(1, 6):
        for backend in (py, ck):
            m, s = backend.mono_mul((0, k), (0, 1))
            e = k + 1
            assert m == ((0, 1) if e % 2 else ())
            assert s == (-1 if (e // 2) % 2 else 1)


@pytest.mark.parametrize("fn", ["poly_mul", "poly_add"])
def test_binary_parity(fn):
    rng = random.Random(1)
    for _ in range(200):
        p, q = _poly(rng), _poly(rng)
        assert getattr(py, fn)(p, q) == getattr(ck, fn)(p, q)


def test_unary_parity():
    rng = random.Random(2)
    for _ in range(200):
        p = _poly(rng)
        c = mpq(rng.randint(-3, 3), 2)
        assert py.poly_scale(p, c) == ck.poly_scale(p, c)
        aid = rng.randint(1, 11)
        assert py.poly_partial(p, aid) == ck.poly_partial(p, aid)
        idmap = {i: rng.randint(1, 11) for i in range(1, 12) if rng.random() < 0.5}
        assert py.poly_rename(p, idmap) == ck.poly_rename(p, idmap)
        acc1, acc2 = dict(p), dict(p)
        q, mono = _poly(rng), _mono(rng)
        assert py.poly_iadd(acc1, q, c, mono) == ck.poly_iadd(acc2, q, c, mono)


def test_pure_python_fallback_selected_by_env(tmp_path):
    import os
    import subprocess
    import sys

    env = dict(os.environ, NOETHER2_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from noether2.kernel import BACKEND; print(BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"

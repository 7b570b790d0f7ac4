"""Random expression generators shared by the property tests."""

import random

from noether2.expr import ONE, ZERO, Expr, jet, param


def c_jet(name, *offs):
    return jet(name, offs)


def d_jet(name, *offs):
    return jet(name, offs, shift=True)


def random_poly(rng: random.Random, atoms, nterms=4, maxdeg=3, coeffs=(-3, 3)) -> Expr:
    """Random polynomial with small integer coefficients in the given atoms."""
    out = ZERO
    for _ in range(nterms):
        c = rng.randint(*coeffs) or 1
        m = ONE * c
        for _ in range(rng.randint(1, maxdeg)):
            m = m * rng.choice(atoms)
        out = out + m
    return out


def continuous_atoms(names=("u", "v"), naxes=2, order=2):
    out = [param("c")]
    for n in names:
        for i in range(order + 1):
            for j in range(order + 1 - i):
                out.append(jet(n, (i, j) if naxes == 2 else (i,)))
    return out


def lattice_atoms(names=("u", "v"), radius=1):
    out = [param("c")]
    for n in names:
        for i in range(-radius, radius + 1):
            for j in range(-radius, radius + 1):
                out.append(jet(n, (i, j), shift=True))
    return out

"""Lattice calculus: shifts, differences, discrete Euler operator, adjoints, telescoped fluxes."""

from __future__ import annotations

from typing import Mapping, Sequence

from .atoms import ArbJet, Independent, Jet, MultiIndex
from .expr import ZERO, Expr, as_expr, map_atoms, partial_wrt

KIND = "difference"


def _jets(e: Expr, name: str | None = None):
    return [
        a
        for a in e.free_atoms()
        if isinstance(a, (Jet, ArbJet)) and a.index.shift and (name is None or a.name == name)
    ]


def shift(e, J) -> Expr:
    """Translate every lattice atom by J; independent variables ``n^i`` become ``n^i + J_i``."""
    e = as_expr(e)
    J = tuple(J)
    if not any(J):
        return e

    def fn(a):
        if isinstance(a, (Jet, ArbJet)) and a.index.shift:
            return Expr(type(a)(a.name, MultiIndex(tuple(x + y for x, y in zip(a.index.offsets, J)), True)))
        if isinstance(a, Independent) and J[a.axis]:
            return Expr(a) + J[a.axis]
        return None

    return map_atoms(e, fn)


apply_index = shift


def unit(axis: int, naxes: int, k: int = 1) -> tuple:
    J = [0] * naxes
    J[axis] = k
    return tuple(J)


def forward_difference(e, axis: int, naxes: int) -> Expr:
    e = as_expr(e)
    return shift(e, unit(axis, naxes)) - e


def backward_difference(e, axis: int, naxes: int) -> Expr:
    e = as_expr(e)
    return e - shift(e, unit(axis, naxes, -1))


def scaled_difference(e, axis: int, naxes: int, step) -> Expr:
    """``(S_axis - id) e / step`` with a symbolic step length."""
    return forward_difference(e, axis, naxes) / as_expr(step)


def divergence(P) -> Expr:
    n = len(P)
    out = ZERO
    for i, p in enumerate(P):
        out = out + forward_difference(p, i, n)
    return out


def discrete_euler(L, name: str) -> Expr:
    """``E~_name(L) = sum_J S_{-J}(dL/d S_J u)``."""
    L = as_expr(L)
    out = ZERO
    for a in sorted(_jets(L, name), key=lambda a: a.index.offsets):
        out = out + shift(partial_wrt(L, a), tuple(-o for o in a.index.offsets))
    return out


euler = discrete_euler


def prolonged_action_terms(Q: Mapping[str, Expr], e) -> list:
    """The summands of :func:`prolonged_action`, one per jet of ``e``."""
    e = as_expr(e)
    out = []
    for a in _jets(e):
        q = Q.get(a.name)
        if q is None or isinstance(a, ArbJet):
            continue
        out.append(shift(q, a.index.offsets) * partial_wrt(e, a))
    return out


def prolonged_action(Q: Mapping[str, Expr], e) -> Expr:
    """``X~ e = sum S_J(Q^a) de/d S_J u^a``."""
    out = ZERO
    for t in prolonged_action_terms(Q, e):
        out = out + t
    return out


prolong = prolonged_action


def adjoint_entry(entry: Mapping[tuple, Expr], naxes: int) -> dict:
    """``c S_J`` has adjoint ``S_{-J}(c) S_{-J}``."""
    out: dict = {}
    for J, c in entry.items():
        K = tuple(-j for j in J)
        out[K] = out.get(K, ZERO) + shift(c, K)
    return {K: v for K, v in out.items() if v}


def apply_entry(entry: Mapping[tuple, Expr], f) -> Expr:
    out = ZERO
    for J, c in entry.items():
        out = out + as_expr(c) * shift(f, J)
    return out


def apply_adjoint_entry(entry: Mapping[tuple, Expr], f) -> Expr:
    out = ZERO
    for J, c in entry.items():
        out = out + shift(as_expr(c) * f, tuple(-j for j in J))
    return out


def _telescope(g, J: Sequence[int], P: list):
    # g - S_{-J} g = sum_i D~_i P^i, walking the axes in order
    n = len(J)
    for i, k in enumerate(J):
        if k > 0:
            for m in range(1, k + 1):
                P[i] = P[i] + shift(g, unit(i, n, -m))
        elif k < 0:
            for m in range(0, -k):
                P[i] = P[i] - shift(g, unit(i, n, m))
        if k:
            g = shift(g, unit(i, n, -k))


def discrete_bilinear_fluxes(a, entry: Mapping[tuple, Expr], b, naxes: int | None = None) -> list:
    """Fluxes P with ``sum_i D~_i P^i = a*Op(b) - b*Op^dagger(a)`` for ``Op = sum_J c_J S_J``."""
    a = as_expr(a)
    b = as_expr(b)
    if naxes is None:
        naxes = len(next(iter(entry))) if entry else 0
    P = [ZERO] * naxes
    for J in sorted(entry):
        _telescope(a * entry[J] * shift(b, J), tuple(J), P)
    return P


bilinear_fluxes = discrete_bilinear_fluxes

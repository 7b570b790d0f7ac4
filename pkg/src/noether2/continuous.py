"""Jet calculus for differential problems: total derivatives, Euler operators, adjoints, fluxes."""

from __future__ import annotations

from itertools import product
from math import comb
from typing import Mapping

from .atoms import ArbJet, Independent, Jet, MultiIndex
from .errors import NotVariational
from .expr import ONE, ZERO, Expr, as_expr, derive, partial_wrt

KIND = "differential"


def _jets(e: Expr, name: str | None = None):
    out = []
    for a in e.free_atoms():
        if isinstance(a, (Jet, ArbJet)) and not a.index.shift and (name is None or a.name == name):
            out.append(a)
    return out


def total_derivative(e, axis: int) -> Expr:
    """``D_axis e``: explicit dependence on the independent variable plus the chain rule over jets."""
    e = as_expr(e)

    def base(a):
        if isinstance(a, Independent):
            return ONE if a.axis == axis else None
        if isinstance(a, (Jet, ArbJet)):
            offs = list(a.index.offsets)
            offs[axis] += 1
            return Expr(type(a)(a.name, MultiIndex(tuple(offs))))
        return None

    return derive(e, base)


def total_derivative_multi(e, J) -> Expr:
    e = as_expr(e)
    for axis, k in enumerate(tuple(J)):
        for _ in range(k):
            e = total_derivative(e, axis)
    return e


apply_index = total_derivative_multi


def divergence(P) -> Expr:
    out = ZERO
    for i, p in enumerate(P):
        out = out + total_derivative(p, i)
    return out


def euler_operator(L, name: str) -> Expr:
    """``E_name(L) = sum_J (-D)_J dL/du_J`` over every jet of ``name`` present in L."""
    L = as_expr(L)
    out = ZERO
    for a in sorted(_jets(L, name), key=lambda a: a.index.offsets):
        term = total_derivative_multi(partial_wrt(L, a), a.index.offsets)
        out = out - term if a.index.order % 2 else out + term
    return out


euler = euler_operator


def prolonged_action_terms(Q: Mapping[str, Expr], e) -> list:
    """The summands of :func:`prolonged_action`, one per jet of ``e``."""
    e = as_expr(e)
    out = []
    for a in _jets(e):
        q = Q.get(a.name)
        if q is None or isinstance(a, ArbJet):
            continue
        out.append(total_derivative_multi(q, a.index.offsets) * partial_wrt(e, a))
    return out


def prolonged_action(Q: Mapping[str, Expr], e) -> Expr:
    """``X e = sum D_J(Q^a) de/du^a_J`` for the evolutionary generator with characteristic Q."""
    out = ZERO
    for t in prolonged_action_terms(Q, e):
        out = out + t
    return out


prolong = prolonged_action


def verify_variational(L, Q: Mapping[str, Expr], names=None, trials=200, tol=1e-9, seed=0) -> bool:
    """Check that X(L) is a total divergence; raises NotVariational otherwise."""
    from .verify import ZERO_STATUSES, zero_test

    XL = prolonged_action(Q, L)
    if names is None:
        names = sorted({a.name for a in _jets(XL)} | set(Q))
    for name in names:
        r = euler_operator(XL, name)
        v = zero_test(r, trials=trials, tol=tol, seed=seed)
        if v.status not in ZERO_STATUSES:
            raise NotVariational(name, r)
    return True


def _multi_range(J):
    return product(*(range(j + 1) for j in J))


def adjoint_entry(entry: Mapping[tuple, Expr], naxes: int) -> dict:
    """Coefficients of ``f -> sum_J (-D)_J(c_J f)`` as an operator ``sum_K b_K D_K``."""
    out: dict = {}
    for J, c in entry.items():
        sign = -1 if sum(J) % 2 else 1
        for K in _multi_range(J):
            mult = 1
            for j, k in zip(J, K):
                mult *= comb(j, k)
            rest = tuple(j - k for j, k in zip(J, K))
            term = total_derivative_multi(c, rest) * (sign * mult)
            if term:
                out[K] = out.get(K, ZERO) + term
    return {K: v for K, v in out.items() if v}


def apply_entry(entry: Mapping[tuple, Expr], f) -> Expr:
    out = ZERO
    for J, c in entry.items():
        out = out + c * total_derivative_multi(f, J)
    return out


def apply_adjoint_entry(entry: Mapping[tuple, Expr], f) -> Expr:
    out = ZERO
    for J, c in entry.items():
        t = total_derivative_multi(as_expr(c) * f, J)
        out = out - t if sum(J) % 2 else out + t
    return out


def _peel(w, J, v, naxes, P):
    # w*D_J v - v*(-D)_J w = sum_i D_i P^i, peeling the lowest nonzero axis first
    while any(J):
        i = next(k for k, j in enumerate(J) if j)
        rest = list(J)
        rest[i] -= 1
        rest = tuple(rest)
        P[i] = P[i] + w * total_derivative_multi(v, rest)
        w = -total_derivative(w, i)
        J = rest


def bilinear_fluxes(a, entry: Mapping[tuple, Expr], b, naxes: int | None = None) -> list:
    """Fluxes P with ``div P = a*Op(b) - b*Op^dagger(a)`` for ``Op = sum_J c_J D_J``."""
    a = as_expr(a)
    b = as_expr(b)
    if naxes is None:
        naxes = len(next(iter(entry))) if entry else 0
    P = [ZERO] * naxes
    for J in sorted(entry):
        _peel(a * entry[J], tuple(J), b, naxes, P)
    return P

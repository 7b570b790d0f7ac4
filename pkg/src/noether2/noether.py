"""Noether's second theorem for differential and difference problems.

The arbitrary functions are treated as extra dependent variables: applying the
Euler operator with respect to each of them to ``Q^a E_a(L)`` yields the
relations.  With linear constraints on the arbitrary functions, multipliers
turn the relations into residual identities and bilinear fluxes give the
conservation laws.  Every routine takes the problem ``kind`` so the same code
serves both calculi.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .atoms import ArbJet, MultiIndex
from .errors import ConstraintViolated, NonlinearCharacteristic, ResidualNonzero
from .expr import ZERO, Expr, as_expr, is_linear_homogeneous, map_atoms
from .operators import DIFFERENCE, DIFFERENTIAL, LinearOperator, calculus
from .verify import DEFAULT_SEED, DEFAULT_TOL, DEFAULT_TRIALS, zero_test


@dataclass
class ConservationLaw:
    """Fluxes ``P`` and the off-shell defect ``R0`` with ``div P - R0 == 0``."""

    fluxes: list
    residual: Expr
    kind: str
    note: str = ""
    specialization: dict = field(default_factory=dict)

    def divergence(self) -> Expr:
        return calculus(self.kind).divergence(self.fluxes)

    def defect(self) -> list:
        """Summands of ``div P - R0``; passing a list lets the verifier evaluate term by term."""
        calc = calculus(self.kind)
        if self.kind == DIFFERENTIAL:
            parts = [calc.total_derivative(p, i) for i, p in enumerate(self.fluxes)]
        else:
            n = len(self.fluxes)
            parts = [calc.forward_difference(p, i, n) for i, p in enumerate(self.fluxes)]
        return parts + [-self.residual]


def gamma_atom(name: str, naxes: int, kind: str) -> Expr:
    return Expr(ArbJet(name, MultiIndex.zero(naxes, kind == DIFFERENCE)))


def euler_expressions(L, deps: Sequence[str], kind: str) -> dict:
    calc = calculus(kind)
    return {a: calc.euler(L, a) for a in deps}


def _mentions(q: Expr, gammas) -> bool:
    names = set(gammas)
    return any(isinstance(a, ArbJet) and a.name in names for a in q.free_atoms())


def _check_linear(Q: Mapping[str, Expr], gammas: Sequence[str], allow_free: bool = False):
    for dep, q in Q.items():
        q = as_expr(q)
        if allow_free and not _mentions(q, gammas):
            continue
        if not q.is_zero and not is_linear_homogeneous(q, gammas):
            raise NonlinearCharacteristic(f"characteristic for {dep!r} is not linear homogeneous in {list(gammas)}")


def master_expression(L, Q: Mapping[str, Expr], deps: Sequence[str], kind: str, E: Mapping | None = None) -> Expr:
    """``Q^a E_a(L)``."""
    E = E if E is not None else euler_expressions(L, deps, kind)
    out = ZERO
    for a in deps:
        q = Q.get(a)
        if q is not None:
            out = out + as_expr(q) * E[a]
    return out


def noether2_relations(L, Q: Mapping[str, Expr], deps: Sequence[str], gammas: Sequence[str], kind: str = DIFFERENTIAL,
                       E: Mapping | None = None) -> list:
    """``E_{g^r}(Q^a E_a(L))`` for each arbitrary function; each vanishes identically for a gauge family.

    Characteristics free of the arbitrary functions contribute nothing.
    """
    _check_linear(Q, gammas, allow_free=True)
    calc = calculus(kind)
    S = master_expression(L, Q, deps, kind, E)
    return [calc.euler(S, g) for g in gammas]


def noether2_relations_disc(L, Q, deps, gammas, E=None) -> list:
    return noether2_relations(L, Q, deps, gammas, DIFFERENCE, E)


def characteristic_operator(Q: Mapping[str, Expr], deps: Sequence[str], gammas: Sequence[str], kind: str,
                            naxes: int) -> LinearOperator:
    """The ``q x R`` operator with ``Q^a = Op_ar(g^r)``."""
    _check_linear(Q, gammas)
    op = LinearOperator.from_linear_rows([Q.get(a, ZERO) for a in deps], gammas, kind, naxes)
    if op is None:
        raise NonlinearCharacteristic("characteristic is not linear homogeneous")
    return op


def relation_operator(Q, deps, gammas, kind, naxes) -> LinearOperator:
    """The ``R x q`` operator of the relations ``D^a_r E_a(L) == 0`` (the adjoint of the characteristic operator)."""
    return characteristic_operator(Q, deps, gammas, kind, naxes).adjoint()


def characteristics_from_relations(D: LinearOperator, deps: Sequence[str], gammas: Sequence[str]) -> dict:
    """``Q^a = (D^a_r)^dagger (g^r)``."""
    g = [gamma_atom(name, D.naxes, D.kind) for name in gammas]
    Q = D.apply_adjoint(g)
    return {a: q for a, q in zip(deps, Q)}


def constrained_residuals(L, Q, C: LinearOperator, nu: Sequence, deps, gammas, kind: str = DIFFERENTIAL,
                          E: Mapping | None = None, relations: Sequence | None = None) -> list:
    """``E_{g^r}(Q^a E_a(L)) - sum_s (C_sr)^dagger(nu^s)`` for each r."""
    if relations is None:
        relations = noether2_relations(L, Q, deps, gammas, kind, E)
    adj = C.apply_adjoint([as_expr(n) for n in nu])
    return [rel - a for rel, a in zip(relations, adj)]


def constrained_residuals_disc(L, Q, C, nu, deps, gammas, E=None) -> list:
    return constrained_residuals(L, Q, C, nu, deps, gammas, DIFFERENCE, E)


def conservation_law(C: LinearOperator, nu: Sequence, gammas: Sequence[str], relations: Sequence,
                     check: bool = True, trials: int = DEFAULT_TRIALS, tol: float = DEFAULT_TOL,
                     seed: int = DEFAULT_SEED) -> ConservationLaw:
    """Fluxes of ``nu^s C_sr(g^r) - g^r C_sr^dagger(nu^s)``.

    The defect ``R0 = nu^s C_sr(g^r) - g^r relation_r`` vanishes when the
    constraints hold and the Euler-Lagrange equations are satisfied.
    ``div P - R0`` equals ``sum_r g^r residual_r``, which is re-checked.
    """
    calc = C.calc
    nu = [as_expr(n) for n in nu]
    g = [gamma_atom(name, C.naxes, C.kind) for name in gammas]
    P = [ZERO] * C.naxes
    for (s, r), ent in sorted(C.entries.items()):
        part = calc.bilinear_fluxes(nu[s], ent, g[r], C.naxes)
        P = [p + q for p, q in zip(P, part)]
    Cg = C.apply(g)
    R0 = ZERO
    for s in range(C.rows):
        R0 = R0 + nu[s] * Cg[s]
    for r in range(C.cols):
        R0 = R0 - g[r] * as_expr(relations[r])
    law = ConservationLaw(P, R0, C.kind, note="bilinear concomitant of the constraint operator")
    if check:
        v = zero_test(law.defect(), trials=trials, tol=tol, seed=seed)
        if not v.is_zero:
            raise ResidualNonzero("divergence of the fluxes does not match the defect", law.divergence() - R0)
    return law


def conservation_law_disc(C, nu, gammas, relations, **kw) -> ConservationLaw:
    return conservation_law(C, nu, gammas, relations, **kw)


def _gamma_substitution(bindings: Mapping[str, Expr], kind: str):
    calc = calculus(kind)
    cache: dict = {}

    def fn(a):
        if isinstance(a, ArbJet) and a.name in bindings:
            key = (a.name, a.index.offsets)
            if key not in cache:
                cache[key] = calc.apply_index(as_expr(bindings[a.name]), a.index.offsets)
            return cache[key]
        return None

    return fn


def substitute_gammas(e, bindings: Mapping[str, Expr], kind: str) -> Expr:
    """Replace every jet or shift of ``g`` by the matching derivative or shift of ``bindings[g]``."""
    return map_atoms(as_expr(e), _gamma_substitution(bindings, kind))


def specialize_claw(cl: ConservationLaw, bindings: Mapping[str, Expr], C: LinearOperator | None = None,
                    gammas: Sequence[str] | None = None, trials: int = DEFAULT_TRIALS, tol: float = DEFAULT_TOL,
                    seed: int = DEFAULT_SEED) -> ConservationLaw:
    """Substitute concrete arbitrary functions after checking that they satisfy the constraints."""
    bindings = {k: as_expr(v) for k, v in bindings.items()}
    if C is not None:
        gammas = list(gammas or bindings)
        missing = [g for g in gammas if g not in bindings]
        if missing:
            raise ConstraintViolated(f"no value given for {missing}")
        vals = C.apply([bindings[g] for g in gammas])
        for s, v in enumerate(vals):
            verdict = zero_test(v, trials=trials, tol=tol, seed=seed)
            if not verdict.is_zero:
                raise ConstraintViolated(f"constraint row {s + 1} does not vanish: {v}")
    fn = _gamma_substitution(bindings, cl.kind)
    P = [map_atoms(p, fn) for p in cl.fluxes]
    R0 = map_atoms(cl.residual, fn)
    return ConservationLaw(P, R0, cl.kind, note=cl.note, specialization=dict(bindings))


def eliminate(rows: Sequence, combiner: LinearOperator) -> Expr:
    """Apply a ``1 x R`` operator to residual rows, e.g. cross-differentiation to remove a multiplier."""
    return combiner.apply([as_expr(r) for r in rows])[0]


def potential_link_check(nu, u: str = "u", c: str = "c") -> tuple:
    """For the lattice KdV multiplier, return ``nu*(u10 - u01)`` and whether it equals ``c - (u11 - u00)(u10 - u01)``."""
    from .atoms import Jet, Param

    def at(i, j):
        return Expr(Jet(u, MultiIndex((i, j), True)))

    nu = as_expr(nu)
    lhs = nu * (at(1, 0) - at(0, 1))
    if nu.is_zero:
        return lhs, True
    target = Expr(Param(c)) - (at(1, 1) - at(0, 0)) * (at(1, 0) - at(0, 1))
    return lhs, lhs == target


def verify_variational(L, Q, deps=None, kind: str = DIFFERENTIAL, **kw) -> bool:
    calc = calculus(kind)
    if kind == DIFFERENTIAL:
        return calc.verify_variational(L, Q, deps, **kw)
    from .errors import NotVariational

    XL = calc.prolonged_action(Q, L)
    names = deps or sorted({a.name for a in XL.free_atoms() if hasattr(a, "index")} | set(Q))
    for name in names:
        r = calc.discrete_euler(XL, name)
        v = zero_test(r, **kw)
        if not v.is_zero:
            raise NotVariational(name, r)
    return True

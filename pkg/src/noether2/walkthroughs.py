"""Worked multi-step derivations on top of the corpus problems.

Both recipes end in an identity that is handed to the zero test; neither is a
general elimination engine.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .dsl import load_corpus, parse_expr
from .noether import constrained_residuals, noether2_relations, substitute_gammas
from .verify import Verdict, zero_test


@dataclass
class Walkthrough:
    name: str
    identity: object  # Expr or list of summands
    verdict: Verdict
    steps: dict

    @property
    def holds(self) -> bool:
        return self.verdict.is_zero


def area_preserving_elimination(**kw) -> Walkthrough:
    """Remove the multiplier of the area-preserving toy problem by cross-differentiation.

    The two residual rows are ``rel_r - (C^dagger nu)_r``; with C = (D_1, D_2)
    that is ``rel_1 + nu_{,1}`` and ``rel_2 + nu_{,2}``.  Applying -D_2 to the
    first and D_1 to the second cancels nu and leaves a relation among the
    Euler-Lagrange expressions alone.  The same relation comes out of the
    unconstrained family obtained from the local solution
    ``g1 = lam_{,2}, g2 = -lam_{,1}`` of the constraint.
    """
    p = load_corpus("area_preserving")
    calc = p.calc
    rel = noether2_relations(p.lagrangian, p.characteristic, p.fields, p.arbitrary, p.kind)
    C = p.constraint_operator()
    res = constrained_residuals(p.lagrangian, p.characteristic, C, p.multiplier_list(), p.fields, p.arbitrary,
                                p.kind, relations=rel)
    eliminated = calc.total_derivative(rel[1], 0) - calc.total_derivative(rel[0], 1)
    via_residuals = calc.total_derivative(res[1], 0) - calc.total_derivative(res[0], 1)

    # local solution of the constraint in terms of a potential lam
    q = replace(p, arbitrary=["lam"])
    lam = {"g1": parse_expr("lam_a2", q), "g2": -parse_expr("lam_a1", q)}
    constraint_check = substitute_gammas(p.constraints[0], lam, p.kind)
    Q = {a: substitute_gammas(c, lam, p.kind) for a, c in p.characteristic.items()}
    (potential_relation,) = noether2_relations(p.lagrangian, Q, p.fields, ["lam"], p.kind)

    identity = eliminated - potential_relation
    verdict = zero_test(identity, **kw)
    steps = {
        "relations": rel,
        "residuals": res,
        "eliminated": eliminated,
        "eliminated_from_residuals": via_residuals,
        "constraint_on_local_solution": constraint_check,
        "potential_relation": potential_relation,
    }
    return Walkthrough("area_preserving_elimination", identity, verdict, steps)


def potential_vorticity(**kw) -> Walkthrough:
    """Cross-differentiate the two specialized shallow-water laws.

    With the conserved densities nu1, nu2 and the common flux nu3,
    ``D_2(D_t nu1 + D_1 nu3) - D_1(D_t nu2 + D_2 nu3) + D_t q`` vanishes
    identically for ``q = J*(h*(y_2 y_1t - y_1 y_2t) - h*(x_1 x_2t - x_2 x_1t) + f)``.
    Each bracket is zero on solutions, so q is a conserved density.
    """
    p = load_corpus("shallow_water")
    calc = p.calc
    T, A1, A2 = 0, 1, 2
    nu1, nu2, nu3 = (p.lets[n] for n in ("nu1", "nu2", "nu3"))
    q = parse_expr("J*(h*(y_a2*y_{t a1} - y_a1*y_{t a2}) - h*(x_a1*x_{t a2} - x_a2*x_{t a1}) + f)", p)
    law1 = calc.total_derivative(nu1, T) + calc.total_derivative(nu3, A1)
    law2 = calc.total_derivative(nu2, T) + calc.total_derivative(nu3, A2)
    parts = [calc.total_derivative(law1, A2), -calc.total_derivative(law2, A1), calc.total_derivative(q, T)]
    verdict = zero_test(parts, **kw)
    return Walkthrough("potential_vorticity", parts, verdict, {"q": q, "law1": law1, "law2": law2})

import random
from fractions import Fraction

import pytest

from helpers import c_jet, d_jet
from noether2 import continuous as cc
from noether2 import lattice as lc
from noether2.dsl import load_corpus, parse_expr
from noether2.errors import ConstraintViolated, NonlinearCharacteristic, ResidualNonzero
from noether2.expr import ONE, ZERO, arb, param
from noether2.noether import (
    characteristic_operator,
    characteristics_from_relations,
    conservation_law,
    constrained_residuals,
    master_expression,
    noether2_relations,
    potential_link_check,
    relation_operator,
    specialize_claw,
    substitute_gammas,
)
from noether2.operators import DIFFERENCE, DIFFERENTIAL, LinearOperator
from noether2.verify import Status, reproduce, zero_test

half = Fraction(1, 2)


def _setup(name):
    p = load_corpus(name)
    rel = noether2_relations(p.lagrangian, p.characteristic, p.fields, p.arbitrary, p.kind)
    return p, rel


def test_wave_residuals_and_fluxes():
    p, rel = _setup("wave")
    C = p.constraint_operator()
    nu = p.multiplier_list()
    res = constrained_residuals(p.lagrangian, p.characteristic, C, nu, p.fields, p.arbitrary, p.kind, relations=rel)
    assert all(r.is_zero for r in res)
    cl = conservation_law(C, nu, p.arbitrary, rel)
    g1, g2 = p.gamma("g1"), p.gamma("g2")
    ux, ut = parse_expr("u_x", p), parse_expr("u_t", p)
    want = [(g1 + g2) * ux - (g1 - g2) * ut, (g1 - g2) * ux - (g1 + g2) * ut]
    assert (cl.divergence() - cc.divergence(want)).is_zero


def test_zero_multiplier_leaves_relation():
    p, rel = _setup("wave")
    C = p.constraint_operator()
    res = constrained_residuals(p.lagrangian, p.characteristic, C, [ZERO, ZERO], p.fields, p.arbitrary, p.kind,
                                relations=rel)
    assert res == rel
    cl = conservation_law(C, [ZERO, ZERO], p.arbitrary, rel, check=False)
    assert cl.fluxes == [ZERO, ZERO]


def test_shallow_water_residuals_and_specializations():
    p, rel = _setup("shallow_water")
    C = p.constraint_operator()
    nu = p.multiplier_list()
    res = constrained_residuals(p.lagrangian, p.characteristic, C, nu, p.fields, p.arbitrary, p.kind, relations=rel)
    assert [r.is_zero for r in res] == [True, True]
    cl = conservation_law(C, nu, p.arbitrary, rel)
    nu1, nu2, nu3 = nu
    first = specialize_claw(cl, {"g1": ONE, "g2": ZERO}, C, p.arbitrary)
    assert first.fluxes == [nu1, nu3, ZERO]
    second = specialize_claw(cl, {"g1": ZERO, "g2": ONE}, C, p.arbitrary)
    assert second.fluxes == [nu2, ZERO, nu3]
    zero = specialize_claw(cl, {"g1": ZERO, "g2": ZERO}, C, p.arbitrary)
    assert zero.fluxes == [ZERO] * 3 and zero.residual.is_zero


def test_specialization_must_satisfy_constraints():
    p, rel = _setup("shallow_water")
    C = p.constraint_operator()
    cl = conservation_law(C, p.multiplier_list(), p.arbitrary, rel, check=False)
    with pytest.raises(ConstraintViolated):
        specialize_claw(cl, {"g1": parse_expr("a1", p), "g2": ZERO}, C, p.arbitrary)


def test_lattice_kdv_chain():
    p, rel = _setup("lattice_kdv")
    C = p.constraint_operator()
    (nu,) = p.multiplier_list()
    (res,) = constrained_residuals(p.lagrangian, p.characteristic, C, [nu], p.fields, p.arbitrary, p.kind,
                                   relations=rel)
    assert res.is_zero
    cl = conservation_law(C, [nu], p.arbitrary, rel)
    g = p.gamma("g")
    assert cl.fluxes == [g * lc.shift(nu, (-1, 0)), -g * lc.shift(nu, (0, -1))]
    one = specialize_claw(cl, {"g": ONE}, C, p.arbitrary)
    assert one.fluxes == [lc.shift(nu, (-1, 0)), -lc.shift(nu, (0, -1))]
    lhs, ok = potential_link_check(nu, "u", "c")
    u = {o: d_jet("u", *o) for o in [(0, 0), (1, 0), (0, 1), (1, 1)]}
    assert ok and lhs == (u[0, 0] - u[1, 1]) * (u[1, 0] - u[0, 1]) + param("c")


def test_lattice_kdv_multiplier_kernel():
    # constants are in the kernel of the adjoint row S_1^dagger - S_2^dagger
    p, rel = _setup("lattice_kdv")
    C = p.constraint_operator()
    (nu,) = p.multiplier_list()
    (res,) = constrained_residuals(p.lagrangian, p.characteristic, C, [nu + 1], p.fields, p.arbitrary, p.kind,
                                   relations=rel)
    assert res.is_zero
    (res0,) = constrained_residuals(p.lagrangian, p.characteristic, C, [ZERO], p.fields, p.arbitrary, p.kind,
                                    relations=rel)
    assert res0 == lc.discrete_euler(p.lagrangian, "u")


@pytest.mark.parametrize("name", ["wave", "shallow_water", "lattice_kdv", "area_preserving"])
def test_negative_control_multiplier_perturbation(name):
    p, rel = _setup(name)
    C = p.constraint_operator()
    nu = p.multiplier_list()
    bump = parse_expr(f"{p.fields[0]}{'[1,0]' if p.shift else '_' + p.axes[0]}", p) ** 2
    bad = [nu[0] + bump] + nu[1:]
    res = constrained_residuals(p.lagrangian, p.characteristic, C, bad, p.fields, p.arbitrary, p.kind, relations=rel)
    verdicts = [zero_test(r, seed=3) for r in res]
    flipped = [v for v in verdicts if v.status == Status.NONZERO]
    assert flipped
    v = flipped[0]
    r = res[verdicts.index(v)]
    value, _ = reproduce(r, v.counterexample)
    assert value != (0, 0)
    assert zero_test(r, seed=3).to_json() == v.to_json()
    with pytest.raises(ResidualNonzero):
        conservation_law(C, bad, p.arbitrary, rel)


def test_gauge_free_characteristic_gives_zero_relations():
    L = half * c_jet("u", 1, 0) ** 2
    assert noether2_relations(L, {"u": ONE}, ["u"], ["g"], DIFFERENTIAL) == [ZERO]


def test_nonlinear_characteristic_rejected():
    g = arb("g", (0, 0))
    with pytest.raises(NonlinearCharacteristic):
        noether2_relations(c_jet("u", 1, 0) ** 2, {"u": g**2}, ["u"], ["g"])


def test_degenerate_two_field_problem_round_trip():
    ux, vy = c_jet("u", 1, 0), c_jet("v", 0, 1)
    L = half * (ux + vy) ** 2
    Q = {"u": arb("g", (0, 1)), "v": -arb("g", (1, 0))}
    (rel,) = noether2_relations(L, Q, ["u", "v"], ["g"])
    Eu, Ev = cc.euler_operator(L, "u"), cc.euler_operator(L, "v")
    assert rel == -cc.total_derivative(Eu, 1) + cc.total_derivative(Ev, 0)
    assert rel.is_zero
    D = relation_operator(Q, ["u", "v"], ["g"], DIFFERENTIAL, 2)
    assert D == LinearOperator(1, 2, DIFFERENTIAL, 2, {(0, 0): {(0, 1): -ONE}, (0, 1): {(1, 0): ONE}})
    assert characteristics_from_relations(D, ["u", "v"], ["g"]) == Q


def test_characteristic_reconstruction_mkg():
    p = load_corpus("mkg_continuous")
    D = relation_operator(p.characteristic, p.fields, p.arbitrary, p.kind, p.naxes)
    back = characteristics_from_relations(D, p.fields, p.arbitrary)
    assert back == {a: p.characteristic[a] for a in p.fields}
    assert characteristics_from_relations(LinearOperator(1, 2, DIFFERENTIAL, 2), ["u", "v"], ["g"]) == {
        "u": ZERO,
        "v": ZERO,
    }


def test_characteristic_operator_matches_characteristic():
    p = load_corpus("shallow_water")
    op = characteristic_operator(p.characteristic, p.fields, p.arbitrary, p.kind, p.naxes)
    gs = [p.gamma(g) for g in p.arbitrary]
    assert op.apply(gs) == [p.characteristic[a] for a in p.fields]


@pytest.mark.parametrize("name", ["area_preserving", "shallow_water", "wave"])
def test_master_identity(name):
    # Q^a E_a - g^r relation_r is a divergence, so every Euler operator kills it
    p, rel = _setup(name)
    S = master_expression(p.lagrangian, p.characteristic, p.fields, p.kind)
    for r, g in zip(rel, p.arbitrary):
        S = S - p.gamma(g) * r
    for a in p.fields + p.arbitrary:
        assert p.calc.euler(S, a).is_zero


@pytest.mark.parametrize("name", ["area_preserving", "shallow_water", "wave"])
def test_linear_reparametrization_invariance(name):
    p, rel = _setup(name)
    rng = random.Random(sum(map(ord, name)))
    while True:
        M = [[rng.randint(-3, 3) for _ in range(2)] for _ in range(2)]
        if M[0][0] * M[1][1] - M[0][1] * M[1][0] in (1, -1):
            break
    new = ["h1", "h2"]
    h = [arb(n, (0,) * p.naxes, shift=p.shift) for n in new]
    bindings = {g: M[r][0] * h[0] + M[r][1] * h[1] for r, g in enumerate(p.arbitrary)}
    Q2 = {a: substitute_gammas(q, bindings, p.kind) for a, q in p.characteristic.items()}
    rel2 = noether2_relations(p.lagrangian, Q2, p.fields, new, p.kind)
    for k in range(2):
        assert rel2[k] == M[0][k] * rel[0] + M[1][k] * rel[1]


def test_discrete_one_axis_negative():
    u0, u1 = d_jet("u", 0), d_jet("u", 1)
    L = half * (u1 - u0) ** 2
    (rel,) = noether2_relations(L, {"u": arb("g", (0,), shift=True)}, ["u"], ["g"], DIFFERENCE)
    assert rel == lc.discrete_euler(L, "u")
    assert zero_test(rel).status == Status.NONZERO

import json

from helpers import c_jet
from noether2.expr import ONE, exp, ln, param, sin
from noether2.verify import Status, reproduce, zero_test

u, ux, ut = c_jet("u", 0, 0), c_jet("u", 1, 0), c_jet("u", 0, 1)


def test_canonical_zero_is_proved():
    v = zero_test(u * u - u**2)
    assert v.status == Status.PROVED_ZERO and v.trials == 0


def test_distinct_atoms_are_nonzero_with_counterexample():
    v = zero_test(ux - ut)
    assert v.status == Status.NONZERO
    assert set(v.counterexample) == {ux.atoms().pop(), ut.atoms().pop()}
    value, _ = reproduce(ux - ut, v.counterexample)
    assert value != (0, 0)


def test_transcendental_summands():
    assert zero_test(exp(u) * exp(-u) - 1).status == Status.PROVED_ZERO
    assert zero_test(sin(u) ** 2).status == Status.NONZERO
    v = zero_test([ln(u**2 + 1) * sin(ux), -sin(ux) * ln(u**2 + 1)], sample=True)
    assert v.status == Status.PROBABLY_ZERO


def test_forced_sampling_of_a_canonical_zero():
    v = zero_test([u * ux, -ux * u], sample=True, trials=50)
    assert v.status == Status.PROBABLY_ZERO and v.trials == 50


def test_float_tolerance_is_relative():
    big = param("B")
    v = zero_test([exp(u) * big**8, -exp(u) * big**8], sample=True)
    assert v.is_zero and v.max_residual < 1e-20


def test_determinism_under_fixed_seed():
    e = exp(ux) - ONE - ux
    a = json.dumps(zero_test(e, seed=42).to_json(), sort_keys=True)
    b = json.dumps(zero_test(e, seed=42).to_json(), sort_keys=True)
    assert a == b
    assert zero_test(e, seed=42).to_json()["seed"] == 42


def test_points_with_vanishing_denominators_are_resampled():
    v = zero_test([1 / (u - 1), -1 / (u - 1)], sample=True, trials=100)
    assert v.status == Status.PROBABLY_ZERO


def test_domain_errors_resample_then_give_up():
    # ln of a negative number is outside the real domain on every draw
    v = zero_test(ln(-(u**2) - 1) - u, trials=3)
    assert v.status == Status.INCONCLUSIVE and v.trials == 0

from noether2.verify import Status, zero_test
from noether2.walkthroughs import area_preserving_elimination, potential_vorticity


def test_area_preserving_elimination():
    w = area_preserving_elimination()
    assert w.holds
    steps = w.steps
    assert steps["eliminated"].is_zero
    assert steps["eliminated_from_residuals"] == steps["eliminated"]
    assert steps["constraint_on_local_solution"].is_zero
    # the individual relations are not identities; only the combination is
    assert zero_test(steps["relations"][0]).status == Status.NONZERO


def test_potential_vorticity_identity():
    w = potential_vorticity()
    assert w.verdict.status == Status.PROVED_ZERO
    assert not w.steps["law1"].is_zero and not w.steps["q"].is_zero

import math

import numpy as np
import pytest

from nsreg import (
    ExponentError,
    FlowParams,
    InequalityCheck,
    NumericalError,
    ScaleError,
    Snapshot,
    build_test_function,
    check_energy_bound,
    check_global_bounds,
    check_interpolation,
    check_poincare_reduction,
    check_pressure_decay,
    generate_field,
    local_energy_residual,
    pressure_field,
    rescale_field,
)
from nsreg.inequalities import checks_to_csv, checks_to_json, sobolev_exponent


@pytest.fixture(scope="module")
def zero32(grid32):
    U = generate_field("zero", FlowParams(end_time=1.0, dt=1 / 16), grid32)
    return U, pressure_field(U)


def test_check_constant_conventions():
    assert InequalityCheck("a", 0.0, {"x": 0.0}).degenerate
    assert InequalityCheck("b", 0.0, {"x": 1.0}).implied_constant == 0.0
    assert InequalityCheck("c", 1.0, {"x": 0.0}).implied_constant == math.inf
    assert InequalityCheck("d", 3.0, {"x": 1.0, "y": 0.5}).implied_constant == 2.0
    with pytest.raises(NumericalError):
        InequalityCheck("e", float("nan"), {"x": 1.0})
    with pytest.raises(NumericalError):
        InequalityCheck("f", 1.0, {"x": -1.0})


def test_serialization():
    checks = [InequalityCheck("g", 1.0, {"x": 0.0}), InequalityCheck("h", 1.0, {"x": 2.0, "y": 2.0})]
    lines = checks_to_csv(checks).splitlines()
    assert lines[0].split(",")[:5] == ["name", "lhs", "rhs", "rhs_terms", "implied_constant"]
    assert "x=2.0;y=2.0" in lines[2]
    assert '"implied_constant": "inf"' in checks_to_json(checks)


@pytest.mark.parametrize("ell, a", [(2, 0), (3, "3/4"), (6, 3), ("5/2", "3/8")])
def test_sobolev_exponent_exact(ell, a):
    from fractions import Fraction

    assert sobolev_exponent(ell) == Fraction(a)


def test_interpolation_identity_and_zero(tg32, grid16):
    U, _ = tg32
    assert check_interpolation(U.snapshot(0), 2).implied_constant == pytest.approx(1.0, abs=1e-12)
    zero = Snapshot(grid16, 0.0, np.zeros(grid16.shape), kind="scalar")
    assert check_interpolation(zero, 4).degenerate
    with pytest.raises(ExponentError):
        check_interpolation(U.snapshot(0), 7)


def test_interpolation_cylinder_needs_large_p(tg32):
    U, _ = tg32
    ok = check_interpolation(U, geometry="cylinder", r=0.25, pq=(2, 4))
    assert math.isfinite(ok.implied_constant)
    with pytest.raises(ExponentError):
        check_interpolation(U, geometry="cylinder", r=0.25, pq=(1.2, 4))


def test_local_energy_of_zero_field(zero32):
    U, P = zero32
    phi = build_test_function(0.25, 1.0, t0=1.0)
    assert local_energy_residual(U, P, phi) == 0.0


def test_test_function_is_caloric():
    phi = build_test_function(0.25, 1.0, t0=1.0)
    assert phi.caloric_residual((0.1, -0.05, 0.07), 0.9) < 2e-3
    low, high = phi.witness()
    assert 0 < low < high
    with pytest.raises(ScaleError):
        build_test_function(1.0, 0.5)


def test_zero_field_is_degenerate(zero32):
    U, P = zero32
    assert check_energy_bound(U, P, 1 / 8, 1 / 2, (9, 3)).degenerate
    assert all(c.degenerate for c in check_global_bounds(U, P))
    assert all(c.degenerate for c in check_pressure_decay(U, P, 1 / 16, 1 / 2, (9, 3), "L33"))


def test_two_dimensional_flow_has_no_vertical_pressure(tg32):
    U, P = tg32
    by_name = {c.name: c for c in check_global_bounds(U, P)}
    assert by_name["global[pi3]"].lhs == 0.0
    assert by_name["global[d3pi4]"].lhs == 0.0
    decay = {c.name: c for c in check_pressure_decay(U, P, 1 / 16, 1 / 2, (9, 3), "L33")}
    assert decay["L33[pi3]"].lhs == 0.0 and decay["L33[d3pi4]"].lhs == 0.0
    assert decay["L33[pi1]"].lhs > 0


def test_scale_ordering_enforced(tg32):
    U, P = tg32
    with pytest.raises(ScaleError):
        check_energy_bound(U, P, 1 / 4, 1 / 2, (9, 3))
    with pytest.raises(ScaleError):
        check_pressure_decay(U, P, 1 / 8, 1 / 2, (9, 3), "L33")


def test_exponent_preconditions(tg32):
    U, P = tg32
    with pytest.raises(ExponentError):
        check_poincare_reduction(U.components([0, 1]), 1 / 8, 1 / 2, (9, 3))


@pytest.mark.parametrize("variant, pq", [("case1", (9, 3)), ("grad", (3, 2)), ("cylinder", (2, 4))])
def test_energy_bound_rescale_invariant(tg32, variant, pq):
    U, P = tg32
    a = check_energy_bound(U, P, 1 / 8, 1 / 2, pq, variant, center=(0.3, 0.2, 0.1))
    b = check_energy_bound(
        rescale_field(U, 2.0), rescale_field(P, 2.0), 1 / 16, 1 / 4, pq, variant, center=(0.15, 0.1, 0.05)
    )
    assert math.isfinite(a.implied_constant)
    assert b.implied_constant == pytest.approx(a.implied_constant, rel=1e-8)


def test_poincare_constants(tg32):
    U, _ = tg32
    one, two = check_poincare_reduction(U.components([0, 1]), 1 / 8, 1 / 2, (2, 4))
    assert 0 < one.implied_constant < math.inf
    assert 0 < two.implied_constant < math.inf

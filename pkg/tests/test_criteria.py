import json
import math

import pytest

from nsreg import (
    ExponentError,
    FlowParams,
    IterationParams,
    ValidationError,
    decay_trace,
    eps_regularity,
    evaluate_criterion,
    generate_field,
    report,
)
from nsreg.criteria import validate_criterion_exponents
from nsreg.exponents import INF


@pytest.fixture(scope="module")
def axis32(grid32):
    return generate_field("axis_heat", FlowParams(end_time=0.25, dt=1 / 16), grid32)


@pytest.mark.parametrize(
    "criterion, pq",
    [("T11_case1", (9, 3)), ("T11_case1", (6, 4)), ("T11_case2", (2, 4)), ("T11_case3", (3, 2)),
     ("T12", (3, INF)), ("T12", ("3/2", INF)), ("T12", (3, 2))],
)
def test_valid_exponents(criterion, pq):
    validate_criterion_exponents(criterion, pq)


@pytest.mark.parametrize(
    "criterion, pq",
    [("T11_case1", (3, 3)), ("T11_case1", (3, INF)), ("T11_case2", (3, 2)), ("T11_case3", (2, 4)),
     ("T12", (1, 2)), ("T12", (INF, 1)), ("T12", (2, 1))],
)
def test_invalid_exponents(criterion, pq):
    with pytest.raises(ExponentError):
        validate_criterion_exponents(criterion, pq)


def test_unknown_criterion():
    with pytest.raises(ValidationError):
        validate_criterion_exponents("T99", (9, 3))


def test_iteration_params_validation():
    with pytest.raises(ValidationError):
        IterationParams(theta=0.2)
    with pytest.raises(ValidationError):
        IterationParams(variant="case4")
    assert IterationParams(theta=1 / 16, count=3).ladder(0.5) == pytest.approx([0.5, 1 / 32, 1 / 512])


@pytest.mark.parametrize("criterion, pq", [("T11_case1", (9, 3)), ("T11_case2", (2, 4)),
                                           ("T11_case3", (3, 2)), ("T12", (3, INF))])
def test_axis_heat_satisfies_everything(axis32, criterion, pq):
    v = evaluate_criterion(axis32, criterion, pq, params=IterationParams(count=3), z0=(0.3, 0.2, 0.1))
    assert v.verdict == "satisfied"
    assert v.measured == 0.0


def test_unreachable_scale_is_inconclusive(axis32):
    v = evaluate_criterion(axis32, "T11_case1", (9, 3), params=IterationParams(count=4))
    assert v.verdict == "inconclusive"
    assert v.values[-1] is None


def test_large_flow_violates(grid32):
    U = generate_field("abc", FlowParams(end_time=0.25, dt=1 / 16, amplitude=50.0), grid32)
    v = evaluate_criterion(U, "T11_case3", (3, 2), params=IterationParams(count=2, eps1=1e-3))
    assert v.verdict == "violated" and v.margin < 0


def test_eps_regularity_modes(grid32):
    U = generate_field("taylor_green_2d", FlowParams(end_time=0.25, dt=1 / 16, amplitude=0.01), grid32)
    params = IterationParams(count=2)
    assert eps_regularity(U, "velocity", (5, 5), params=params).verdict == "satisfied"
    assert eps_regularity(U, "vorticity", (2, 2), params=params).verdict == "satisfied"
    with pytest.raises(ExponentError):
        eps_regularity(U, "vorticity", (9, 3))


def test_decay_trace_and_report(tg32):
    U, P = tg32
    trace = decay_trace(U, P, IterationParams(count=3, variant="thm35"), z0=(0.3, 0.2, 0.1))
    assert len(trace.F) == 3 and len(trace.halved) == 2
    assert all(math.isfinite(f) and f > 0 for f in trace.F)
    rep = report(traces=[trace])
    lines = rep.trace_csv().splitlines()
    assert lines[0] == "variant,r,F,A,E,eps_term,delta_term,halved,field_id,n,param_hash"
    assert len(lines) == 4
    assert json.loads(rep.to_json())["traces"][0]["variant"] == "thm35"
    with pytest.raises(ValidationError):
        report(verdicts=[trace])

import math

import numpy as np
import pytest

from nsreg import CylinderSpec, ExponentPair, ScaleError, ValidationError, constant_field, quantity, quantity_sweep
from nsreg.quantities import QUANTITY_KINDS, loglog_slope


@pytest.fixture(scope="module")
def const(grid32):
    return constant_field(grid32, [1.0, 2.0, 2.0], times=np.linspace(0.0, 1.0, 17))


@pytest.mark.parametrize("pq", [(2, 2), (3, 3), (9, 3), (6, "inf")])
@pytest.mark.parametrize("r", [0.5, 0.25])
def test_constant_field_G(const, pq, r):
    pair = ExponentPair(*pq)
    got = quantity("G", const, pair, CylinderSpec(r))
    expected = 3.0 * r * (4 * math.pi / 3) ** (1 / pair.pf)
    assert got == pytest.approx(expected, rel=1e-6)


def test_constant_field_A_and_E(const):
    r = 0.5
    assert quantity("A", const, None, CylinderSpec(r)) == pytest.approx(9.0 * 4 * math.pi / 3 * r**2, rel=1e-6)
    assert quantity("E", const, None, CylinderSpec(r)) == pytest.approx(0.0, abs=1e-20)


def test_mean_subtracted_constant_vanishes(const):
    pair = ExponentPair(3, 3)
    for geometry, mode in (("ball", "ball_mean"), ("vertical", "disc_mean")):
        v = quantity("Gtilde", const, pair, CylinderSpec(0.5, geometry=geometry), mode)
        assert v == pytest.approx(0.0, abs=1e-10)


def test_tilde_needs_mean(const):
    with pytest.raises(ValidationError):
        quantity("Gtilde", const, ExponentPair(3, 3), CylinderSpec(0.5))


def test_sweep_is_scale_ordered_and_serializes(tg32):
    U, _ = tg32
    rep = quantity_sweep(QUANTITY_KINDS, U, ExponentPair(3, 3), scales=(0.5, 0.25))
    assert rep.scales("G") == [0.5, 0.25]
    csv = rep.to_csv().splitlines()
    assert csv[0].startswith("kind,p,q,r,geometry,value")
    assert len(csv) == 1 + 2 * len(QUANTITY_KINDS)
    assert all(np.isfinite(e.value) and e.value >= 0 for e in rep.entries)


def test_unresolvable_scale_raises(tg32):
    U, _ = tg32
    with pytest.raises(ScaleError):
        quantity_sweep(["G"], U, ExponentPair(3, 3), scales=(1e-6,))


def test_small_scale_slope_of_smooth_field(tg32):
    # a smooth nonvanishing field has G(u; r) ~ r as r -> 0
    U, _ = tg32
    z0 = (0.3, 0.2, 0.0)
    rs = [0.05, 0.025, 0.0125]
    vals = [quantity("G", U, ExponentPair(3, 3), CylinderSpec(r, center=z0)) for r in rs]
    assert loglog_slope(rs, vals) == pytest.approx(1.0, abs=0.05)

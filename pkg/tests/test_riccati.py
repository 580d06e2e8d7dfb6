import math

import pytest
from hypothesis import given, strategies as st

from specgame import ConfigError, DegenerateParametersError, MarketParams, Mode, riccati_roots
from specgame.riccati import CoefficientSystem
from specgame.symmetric import k_radical


def test_mode_aliases():
    assert Mode.parse("MatchedToProp2") is Mode.MATCHED
    assert Mode.parse("AsPrintedProp1") is Mode.PRINTED
    assert Mode.parse("feedback") is Mode.FEEDBACK
    with pytest.raises(ConfigError):
        Mode.parse("bogus")


def test_matched_roots_p0(p0):
    a1, a2 = riccati_roots(p0, "matched")
    assert a1 < a2
    assert a1 == pytest.approx(0.16583, abs=1e-5)
    assert a2 == pytest.approx(50.2509, abs=1e-4)
    sysm = CoefficientSystem.build(p0, "matched")
    for r in (a1, a2):
        assert abs(sysm.riccati_residual(r)) < 1e-9 * sysm.q1 * r


def test_printed_small_root_p0(p0):
    # k^2 - 50.41667 k + 25 = 0
    a1, _ = riccati_roots(p0, "printed")
    assert a1 == pytest.approx(0.500843, abs=1e-6)
    b = 302.5 / 6
    assert a1 == pytest.approx((b - math.sqrt(b * b - 100)) / 2, rel=1e-12)


def test_feedback_small_root_p0(p0):
    a1, _ = riccati_roots(p0, "feedback")
    # 8 k^2 - (26*5 + 10*10 + 9*0.5*15) k + 2*25 = 0
    q1 = 130 + 100 + 67.5
    assert a1 == pytest.approx((q1 - math.sqrt(q1 * q1 - 1600)) / 16, rel=1e-12)
    assert a1 == pytest.approx(0.1688337, abs=1e-7)


@pytest.mark.parametrize("mode", list(Mode))
def test_zero_asymmetry_zero_root(mode):
    p = MarketParams(s_lo=7.0, s_hi=7.0)
    if mode is Mode.PRINTED:
        pytest.skip("printed constant term does not vanish with s2")
    assert riccati_roots(p, mode)[0] == 0.0


def test_radical_form_agrees_with_quadratic():
    for p in (MarketParams(), MarketParams(s_lo=1, s_hi=30, rho=1.5)):
        assert k_radical(p) == pytest.approx(riccati_roots(p, "matched")[0], rel=1e-9)


def test_degenerate_discriminant_raises():
    sysm = CoefficientSystem(MarketParams(), Mode.MATCHED, 6.0, 1.0, 2.0, -6.0, 3.0, 0.0)
    with pytest.raises(DegenerateParametersError):
        sysm.roots()


@given(st.floats(0.1, 50), st.floats(0, 50), st.floats(0.01, 2.0), st.sampled_from(list(Mode)))
def test_roots_are_real_and_ordered(s_lo, extra, rho, mode):
    p = MarketParams(rho=rho, s_lo=s_lo, s_hi=s_lo + extra)
    a1, a2 = riccati_roots(p, mode)
    assert 0 <= a1 < a2
    sysm = CoefficientSystem.build(p, mode)
    assert abs(sysm.riccati_residual(a1)) <= 1e-9 * max(1.0, sysm.q1 * a1, sysm.q0)

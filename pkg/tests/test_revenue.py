import numpy as np
import pytest
from scipy.integrate import quad

from specgame import (ConfigError, MarketParams, aggregate_revenues, phase_revenue, revenue_gain,
                      solve_asymmetric, solve_symmetric, swap_roles)
from specgame.revenue import finite_revenue, infinite_revenue, infinite_revenue_quad


def test_zero_horizon_revenue_is_zero(p0):
    _, tr = solve_asymmetric(p0, 0.5, 0.0)
    assert phase_revenue(tr, 1) == 0.0


def test_steady_state_revenue_matched(p0):
    _, tr = solve_symmetric(p0, 0.5, 1.0, mode="matched")
    price = tr.p1[0]
    assert price == pytest.approx(6.38889, abs=1e-5)
    # constant integrand price * 1/2 discounted from t = 1
    assert phase_revenue(tr, 1) == pytest.approx(np.exp(-0.5) * price * 0.5 / 0.5, rel=1e-14)
    assert phase_revenue(tr, 1) == pytest.approx(3.87506, abs=1e-5)


@pytest.mark.parametrize("x1_T", [0.2, 0.5, 0.73])
@pytest.mark.parametrize("mode", ["feedback", "matched"])
def test_infinite_closed_form_against_truncated_quadrature(p0, x1_T, mode):
    _, tr = solve_symmetric(p0, x1_T, 1.5, mode=mode)
    for op in (1, 2):
        assert infinite_revenue(tr.solution, op) == pytest.approx(
            infinite_revenue_quad(tr.solution, op), rel=1e-8, abs=1e-12)


def test_finite_revenue_converges_under_refinement(p0):
    _, tr = solve_asymmetric(p0, 0.6, 1.5)
    sol = tr.solution
    value, err = finite_revenue(sol, 1)
    assert err < 1e-8 * value
    # an independent fixed-rule composite quadrature on a doubled grid
    from numpy.polynomial.legendre import leggauss

    def composite(n):
        x, w = leggauss(8)
        edges = np.linspace(0, 1.5, n + 1)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            t = 0.5 * (a + b) + 0.5 * (b - a) * x
            p1, _ = sol.prices(t)
            total += 0.5 * (b - a) * np.sum(w * np.exp(-0.5 * t) * p1 * (sol.x1(t) + sol.share_rate(t)))
        return total

    assert composite(16) == pytest.approx(composite(32), rel=1e-7)
    assert composite(32) == pytest.approx(value, rel=1e-9)


def test_revenue_falls_with_discount_rate_on_fixed_path(p0):
    _, tr = solve_asymmetric(p0, 0.5, 1.5)
    _, st = solve_symmetric(p0, tr.solution.x1_T, 1.5)
    for op in (1, 2):
        vals = [phase_revenue(tr, op, rho) + phase_revenue(st, op, rho) for rho in (0.3, 0.5, 0.8)]
        assert vals[0] > vals[1] > vals[2] > 0


def test_symmetric_start_relabeling(p0):
    r = aggregate_revenues(p0, 0.5, 1.5)
    r1_A, r2_B = r.r_total_A_to_1
    r1_B, r2_A = r.r_total_A_to_2
    assert r1_A == r2_A and r1_B == r2_B


@pytest.mark.parametrize("x1_0", [0.35, 0.6])
def test_swap_matches_explicit_solve(p0, x1_0):
    a = aggregate_revenues(p0, x1_0, 1.5, method="swap")
    b = aggregate_revenues(p0, x1_0, 1.5, method="explicit")
    assert a.r_total_A_to_2 == pytest.approx(b.r_total_A_to_2, rel=1e-10)
    assert a.a_to_2.r_ap == pytest.approx(b.a_to_2.r_ap, rel=1e-10)
    assert a.a_to_2.r_sp == pytest.approx(b.a_to_2.r_sp, rel=1e-10)


def test_swap_is_an_involution(p0):
    r = aggregate_revenues(p0, 0.3, 1.0).a_to_1
    assert swap_roles(swap_roles(r)) == r


def test_gain_shape(p0):
    gains = [aggregate_revenues(p0, 0.5, T).gain for T in (0.5, 1.0, 1.5, 2.0)]
    assert np.all(np.diff(gains) > 0)
    assert gains[2] > 1
    T = 1.5
    assert (aggregate_revenues(p0.replace(eta=0.75), 0.5, T).gain
            > aggregate_revenues(p0.replace(eta=0.25), 0.5, T).gain)
    assert aggregate_revenues(p0, 0.6, T).gain > aggregate_revenues(p0, 0.5, T).gain


def test_no_premium_gain_is_one(p0):
    for T in (0.5, 2.0):
        r = aggregate_revenues(p0.replace(eta=0.0), 0.5, T)
        assert revenue_gain(r) == pytest.approx(1.0, abs=1e-8)


def test_revenues_nonnegative_and_serialisable(p0):
    r = aggregate_revenues(p0, 0.6, 1.5)
    d = r.to_dict()
    assert min(d["r_ap"] + d["r_sp"] + d["r_total_A_to_1"] + d["r_total_A_to_2"]) > 0
    assert d["gain"] == r.gain
    assert set(r.auction_revenues()) == {"r1_A", "r2_A", "r1_B", "r2_B"}


def test_argument_checks(p0):
    _, tr = solve_asymmetric(p0, 0.5, 1.0)
    with pytest.raises(ConfigError):
        phase_revenue(tr, 3)
    with pytest.raises(ConfigError):
        aggregate_revenues(p0, 0.5, 1.0, method="guess")

import numpy as np
import pytest

from specgame import (AuctionInputs, ConfigError, DiscreteGameSetup, MarketParams, OracleError,
                      auction_best_response, backward_induction, compare_finite, compare_infinite,
                      equilibrium_bids, k_at, asym_coefficients, residual_report, solve_asymmetric,
                      solve_symmetric, solve_symmetric_coeffs)
from specgame.market import ASYMMETRIC, SYMMETRIC, PhaseKind
from specgame.oracle import adjudicate, expected_spiteful_payoff

ASYM = PhaseKind(ASYMMETRIC, 1)
SYM = PhaseKind(SYMMETRIC)


@pytest.fixture(scope="module")
def sym_oracle():
    return backward_induction(DiscreteGameSetup(MarketParams(), SYM, 1e-4))


@pytest.fixture(scope="module")
def asym_oracle():
    return backward_induction(DiscreteGameSetup(MarketParams(), ASYM, 1e-4, 1.5))


def test_setup_validation(p0):
    with pytest.raises(ConfigError):
        DiscreteGameSetup(p0, ASYM, 0.0, 1.0)
    with pytest.raises(ConfigError):
        DiscreteGameSetup(p0, ASYM, 0.1, 1.0)


def test_stationary_fixed_point_matches_feedback_coefficients(p0, sym_oracle):
    c = solve_symmetric_coeffs(p0, "feedback")
    assert sym_oracle.k1[0] == pytest.approx(c.k, abs=1e-3)
    assert sym_oracle.k2[0] == pytest.approx(c.k, abs=1e-3)
    assert sym_oracle.e1[0] == pytest.approx(c.e1, abs=1e-3)
    assert sym_oracle.e2[0] == pytest.approx(c.e2, abs=1e-3)


def test_stationary_fixed_point_separates_from_matched(p0, sym_oracle):
    feedback = solve_symmetric_coeffs(p0, "feedback")
    matched = solve_symmetric_coeffs(p0, "matched")
    oracle_err = abs(sym_oracle.k1[0] - feedback.k)
    assert abs(sym_oracle.k1[0] - matched.k) > 100 * oracle_err


def test_finite_horizon_k0(p0, asym_oracle):
    assert asym_oracle.k1[0] == pytest.approx(k_at(asym_coefficients(p0, 1.5), 0.0), abs=1e-3)
    printed = k_at(asym_coefficients(p0, 1.5, "printed"), 0.0)
    assert abs(asym_oracle.k1[0] - printed) > 0.1


def test_terminal_stage_prices(p0, asym_oracle):
    p1, p2 = asym_oracle.prices(len(asym_oracle.p1_const) - 1, 0.5)
    assert p1 == pytest.approx(25 / 3 + 5 / 6, abs=1e-3)
    assert p2 == pytest.approx(20 / 3 - 5 / 6, abs=1e-3)


def test_no_premium_prices_coincide():
    p = MarketParams(eta=0.0)
    sol = backward_induction(DiscreteGameSetup(p, ASYM, 1e-3, 1.0))
    _, x, p1, p2 = sol.simulate(0.5)
    assert np.max(np.abs(p1 - p2)) < 1e-9
    assert np.max(np.abs(x - 0.5)) < 1e-9


def test_first_order_convergence(p0):
    k_exact = k_at(asym_coefficients(p0, 1.5), 0.0)
    errs = [abs(backward_induction(DiscreteGameSetup(p0, ASYM, dt, 1.5)).k1[0] - k_exact)
            for dt in (4e-4, 2e-4, 1e-4)]
    for coarse, fine in zip(errs, errs[1:]):
        assert 1.7 < coarse / fine < 2.3


def test_deterministic(p0):
    a = backward_induction(DiscreteGameSetup(p0, ASYM, 1e-3, 1.0))
    b = backward_induction(DiscreteGameSetup(p0, ASYM, 1e-3, 1.0))
    assert np.array_equal(a.k1, b.k1) and np.array_equal(a.p1_const, b.p1_const)


@pytest.mark.parametrize("seed", range(8))
def test_stage_games_nonsingular_for_random_params(seed):
    rng = np.random.default_rng(seed)
    s_lo = rng.uniform(0.5, 20)
    p = MarketParams(u0=rng.uniform(1, 30), eta=rng.uniform(0, 0.9), rho=rng.uniform(0.05, 2),
                     s_lo=s_lo, s_hi=s_lo + rng.uniform(0, 30))
    sol = backward_induction(DiscreteGameSetup(p, ASYM, 1e-3, 1.0))
    assert np.all(np.isfinite(sol.k1))


def test_fixed_point_iteration_limit(p0):
    with pytest.raises(OracleError):
        backward_induction(DiscreteGameSetup(p0, SYM, 1e-3, max_steps=10))


def test_compare_helpers(p0, asym_oracle, sym_oracle):
    assert compare_finite(p0, 0.5, 1.5, "feedback", oracle=asym_oracle).passed
    assert not compare_finite(p0, 0.5, 1.5, "printed", oracle=asym_oracle).passed
    assert compare_infinite(p0, "feedback", oracle=sym_oracle).passed


def test_adjudication_ranks_modes(p0):
    adj = adjudicate(p0, 0.5, dt=2e-4)
    assert adj.ratio("feedback") < 1.0
    assert adj.ratio("printed") > 10.0


# -- residual checks -------------------------------------------------------------

@pytest.mark.parametrize("T", [0.5, 1.5])
def test_feedback_trajectory_passes_residuals(p0, T):
    _, tr = solve_asymmetric(p0, 0.5, T)
    rep = residual_report(tr)
    assert rep.passed, rep.to_dict()
    assert rep.boundary < 1e-10


def test_perturbed_prices_fail_first_order_condition(p0):
    _, tr = solve_asymmetric(p0, 0.5, 1.5)
    rep = residual_report(tr.with_prices(tr.p1 + 0.01, tr.p2))
    assert "foc" in rep.failures
    assert rep.status == "FAIL"


def test_stationary_trajectory_residuals_at_floor(p0):
    _, tr = solve_symmetric(p0, 0.5, 1.0)
    rep = residual_report(tr)
    assert rep.passed
    assert max(rep.foc, rep.adjoint, rep.ode) < 1e-10


def test_matched_mode_fails_full_adjoint(p0):
    _, tr = solve_asymmetric(p0, 0.5, 1.5, mode="matched")
    assert "adjoint" in residual_report(tr).failures
    # with the rival's slope truncated to its costate-free part it is consistent
    assert residual_report(tr, adjoint_form="explicit").adjoint < 1e-5


def test_residual_report_serialises(p0):
    _, tr = solve_asymmetric(p0, 0.5, 0.5)
    d = residual_report(tr).to_dict()
    assert d["status"] == "PASS" and d["phase"] == "asymmetric"


# -- auction best response -------------------------------------------------------------

def _inputs(gamma):
    # pi_B = r_B when the B-side costs are zero
    return AuctionInputs(r1_A=100, r2_A=90, r1_B=40, r2_B=30, c_A=0.1, c_B=0.0, c_BS=0.0, gamma=gamma)


def test_best_response_self_interested():
    best, bids, _ = auction_best_response(_inputs(0.0))
    assert abs(best - 30.05) <= bids[1] - bids[0]


def test_best_response_malicious():
    best, bids, _ = auction_best_response(_inputs(1.0))
    assert abs(best - 60.0) <= bids[1] - bids[0]
    assert equilibrium_bids(_inputs(1.0)).b1 == 60.0


def test_payoff_concave():
    for g in (0.0, 0.4, 1.0):
        _, _, pay = auction_best_response(_inputs(g), grid_n=20001)
        assert np.max(np.diff(pay, 2)) <= 1e-9


def test_payoff_matches_direct_integration():
    from scipy.integrate import quad

    inp = _inputs(0.3)
    b = 40.0
    g = inp.gamma

    def integrand(bj):
        if b > bj:
            return (1 - g) * (inp.r1_A - b) - g * inp.pi_B(2)
        return (1 - g) * inp.pi_B(1) - g * (inp.r2_A - bj)

    direct = quad(integrand, inp.c_A, inp.r2_A, points=[b])[0] / (inp.r2_A - inp.c_A)
    assert expected_spiteful_payoff(inp, b) == pytest.approx(direct, rel=1e-12)


def test_best_response_input_errors():
    bad = AuctionInputs(r1_A=10, r2_A=0.05, r1_B=1, r2_B=1, c_A=0.1)
    with pytest.raises(ConfigError):
        auction_best_response(bad)
    with pytest.raises(ConfigError):
        auction_best_response(_inputs(0.0), grid_n=100)

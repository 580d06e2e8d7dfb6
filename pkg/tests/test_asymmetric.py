import numpy as np
import pytest
from scipy.integrate import solve_ivp

from specgame import (ConfigError, MarketParams, Mode, ValidityError, asym_coefficients,
                      costate_offsets, equilibrium_prices, k_at, riccati_roots, solve_asymmetric,
                      solve_symmetric_coeffs, z_at)
from specgame.market import share_rate
from specgame.riccati import CoefficientSystem

MODES = list(Mode)


def _fd(f, t, h=1e-4):
    return (f(t + h) - f(t - h)) / (2 * h)


@pytest.mark.parametrize("mode", MODES)
def test_transversality(p0, mode):
    c = asym_coefficients(p0, 1.5, mode)
    for fn in (c.k, c.z, c.e1, c.e2):
        assert abs(fn(1.5)) < 1e-10


@pytest.mark.parametrize("mode", ["matched", "feedback"])
def test_k_between_zero_and_small_root(p0, mode):
    c = asym_coefficients(p0, 1.5, mode)
    t = np.linspace(0, 1.5, 301)
    k = c.k(t)
    assert np.all(k >= 0) and np.all(np.diff(k) <= 0)
    assert 0 < k_at(c, 0.0) < c.alpha1


@pytest.mark.parametrize("mode", ["matched", "feedback"])
def test_long_horizon_k_reaches_stationary_value(p0, mode):
    c = asym_coefficients(p0, 200.0, mode)
    assert k_at(c, 0.0) == pytest.approx(riccati_roots(p0, mode)[0], abs=1e-6)
    assert k_at(c, 0.0) == pytest.approx(solve_symmetric_coeffs(p0, mode).k, abs=1e-6)


def test_k0_grows_monotonically_with_horizon(p0):
    ks = [k_at(asym_coefficients(p0, T, "matched"), 0.0) for T in (0.25, 0.5, 1, 2, 4, 8)]
    assert np.all(np.diff(ks) > 0)


def test_k_at_rejects_outside_horizon(p0):
    c = asym_coefficients(p0, 1.5)
    with pytest.raises(ValueError):
        k_at(c, 1.6)
    with pytest.raises(ValueError):
        k_at(c, -0.1)


@pytest.mark.parametrize("mode", MODES)
def test_k_solves_riccati(p0, mode):
    c = asym_coefficients(p0, 1.5, mode)
    t = np.linspace(0.05, 1.45, 29)
    assert np.max(np.abs(_fd(c.k, t) - c.k_dot(t))) < 1e-7


def test_z_closed_form_value(p0):
    # 2 s2 / (3 (1 + rho)) (1 - e^{-(1 + rho) T})
    assert z_at(p0, 1.5, 0.0, "matched") == pytest.approx(10 / 4.5 * (1 - np.exp(-2.25)), rel=1e-14)
    assert z_at(p0, 1.5, 0.0, "matched") == pytest.approx(1.98800, abs=1e-5)
    assert z_at(p0, 1.5, 1.5, "matched") == 0.0


def test_z_vanishes_without_asymmetry():
    p = MarketParams(s_lo=6.0, s_hi=6.0)
    for mode in MODES:
        if mode is Mode.PRINTED:
            continue
        assert np.max(np.abs(z_at(p, 1.5, np.linspace(0, 1.5, 11), mode))) < 1e-14


@pytest.mark.parametrize("mode", MODES)
def test_z_and_e1_residuals(p0, mode):
    c = asym_coefficients(p0, 1.5, mode)
    s = c.system
    t = np.linspace(0.05, 1.45, 29)
    z_res = _fd(c.z, t) - (s.z_rate * c.z(t) - s.z_forcing(c.k(t)))
    e_res = _fd(c.e1, t) - (c.mu(t) * c.e1(t) + c.nu(t))
    assert np.max(np.abs(z_res)) < 1e-6
    assert np.max(np.abs(e_res)) < 1e-6


@pytest.mark.parametrize("mode", MODES)
def test_coefficients_match_ode_integration(p0, mode):
    """Independent route: integrate the coefficient ODEs backward from T."""
    sysm = CoefficientSystem.build(p0, mode)
    T = 1.5

    def rhs(t, y):
        k, z, e1 = y
        return [sysm.riccati_rate(k), sysm.z_rate * z - sysm.z_forcing(k),
                sysm.mu(k) * e1 + sysm.nu(k, z, 5.0)]

    sol = solve_ivp(rhs, [T, 0], [0, 0, 0], rtol=1e-12, atol=1e-14, dense_output=True)
    c = asym_coefficients(p0, T, mode)
    t = np.linspace(0, T, 41)
    k, z, e1 = sol.sol(t)
    assert np.max(np.abs(c.k(t) - k)) < 1e-9
    assert np.max(np.abs(c.z(t) - z)) < 1e-9
    assert np.max(np.abs(c.e1(t) - e1)) < 1e-9


def test_costate_offsets_terminal_and_relation(p0):
    grid = np.linspace(0, 1.5, 50)
    e1, e2 = costate_offsets(p0, 1.5, grid)
    c = asym_coefficients(p0, 1.5)
    assert e1[-1] == 0.0 and e2[-1] == 0.0
    assert np.array_equal(e2, e1 - c.z(grid))


@pytest.mark.parametrize("mode", ["matched", "feedback"])
def test_e1_long_horizon_without_premium_matches_stationary(mode):
    p = MarketParams(eta=0.0)
    c = asym_coefficients(p, 60.0, mode)
    sym = solve_symmetric_coeffs(p, mode)
    assert c.e1(0.0) == pytest.approx(sym.e1, abs=1e-3)
    assert c.e2(0.0) == pytest.approx(sym.e2, abs=1e-3)


def test_price_gap_identity(p0):
    c = asym_coefficients(p0, 1.5)
    t = np.linspace(0, 1.5, 31)
    for x in (0.0, 0.3, 0.8):
        p1, p2 = equilibrium_prices(c, t, x)
        gap = (10 - 5 - c.e1(t) - c.e2(t)) / 3 + 2 * (5 - c.k(t)) / 3 * x
        assert np.max(np.abs((p1 - p2) - gap)) < 1e-13


def test_terminal_price_limit(p0):
    c = asym_coefficients(p0, 1.5)
    p1, p2 = equilibrium_prices(c, 1.5, 0.5)
    assert p1 == pytest.approx(25 / 3 + 5 / 6, abs=1e-10)
    assert p2 == pytest.approx(20 / 3 - 5 / 6, abs=1e-10)


@pytest.mark.parametrize("mode", MODES)
def test_no_premium_symmetric_start_stays_put(mode):
    p = MarketParams(eta=0.0)
    _, tr = solve_asymmetric(p, 0.5, 1.5, mode=mode)
    if mode is Mode.PRINTED:
        # the literal coefficients break the relabeling symmetry
        assert np.max(np.abs(tr.x1 - 0.5)) > 1e-3
        return
    assert np.max(np.abs(tr.x1 - 0.5)) < 1e-12
    assert np.max(np.abs(tr.p1 - tr.p2)) < 1e-12


@pytest.mark.parametrize("T", [0.5, 1.5])
def test_trajectory_shape_and_ode_residual(p0, T):
    _, tr = solve_asymmetric(p0, 0.5, T, grid=301)
    sol = tr.solution
    assert tr.x1[0] == 0.5
    assert np.all(np.diff(tr.x1) > 0)
    assert np.all(np.diff(tr.p1) >= 0)
    assert tr.valid
    t = tr.times[1:-1]
    rate = share_rate(p0, tr.phase, sol.x1(t), *sol.prices(t), check=False)
    assert np.max(np.abs(_fd(sol.x1, t, 1e-3) - rate)) < 1e-6
    l1, l2 = sol.costates(t)
    assert np.max(np.abs(l1 - (sol.coeffs.k(t) * sol.x1(t) + sol.coeffs.e1(t)))) == 0.0


def test_strategy_space_containment(p0):
    for T in (0.5, 1.0, 1.5, 2.0):
        for x in (0.4, 0.5, 0.6):
            _, tr = solve_asymmetric(p0, x, T, on_invalid="error")
            assert tr.valid


def test_zero_horizon_is_empty(p0):
    c, tr = solve_asymmetric(p0, 0.37, 0.0)
    assert len(tr) == 0
    assert tr.solution.x1_T == 0.37


def test_input_validation(p0):
    with pytest.raises(ConfigError):
        solve_asymmetric(p0, 1.2, 1.0)
    with pytest.raises(ConfigError):
        solve_asymmetric(p0, 0.5, 1.0, grid=10)
    with pytest.raises(ConfigError):
        solve_asymmetric(p0, 0.5, -1.0)
    with pytest.raises(ConfigError):
        solve_asymmetric(p0, 0.5, 1.0, on_invalid="shrug")


def test_validity_violations_are_flagged():
    p = MarketParams(s_lo=0.2, s_hi=10.0)
    with pytest.warns(RuntimeWarning):
        _, tr = solve_asymmetric(p, 0.5, 1.0)
    assert not tr.valid
    with pytest.raises(ValidityError):
        solve_asymmetric(p, 0.5, 1.0, on_invalid="error")


def test_operator_two_advantage_mirrors_operator_one(p0):
    _, a = solve_asymmetric(p0, 0.3, 1.5, advantaged=1)
    _, b = solve_asymmetric(p0, 0.7, 1.5, advantaged=2)
    assert np.max(np.abs(a.x1 - (1 - b.x1))) < 1e-12
    assert np.max(np.abs(a.p1 - b.p2)) < 1e-12
    assert np.max(np.abs(a.p2 - b.p1)) < 1e-12


def test_trajectory_arrays_are_read_only(p0):
    _, tr = solve_asymmetric(p0, 0.5, 1.0)
    with pytest.raises(ValueError):
        tr.p1[0] = 0.0

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from specgame import QuadratureError
from specgame.quadrature import LinearFlow, integrate_spans


def test_integrate_spans_polynomial_exact():
    lo = np.array([0.0, 1.0, 2.0])
    hi = np.array([1.0, 3.0, 2.0])
    got = integrate_spans(lambda t: t ** 5, lo, hi)
    assert got == pytest.approx((hi ** 6 - lo ** 6) / 6, rel=1e-14, abs=1e-14)


def test_constant_coefficient_flow_matches_closed_form():
    flow = LinearFlow(-2.0, lambda t: 3.0 + 0 * t, 0.0, 4.0, 1.0)
    t = np.linspace(0, 4, 101)
    exact = 1.5 + (1.0 - 1.5) * np.exp(-2 * t)
    assert np.max(np.abs(flow(t) - exact)) < 1e-13
    assert flow(0.0) == 1.0


def test_end_pinned_flow_matches_ode_solver():
    rate = lambda t: np.sin(t) - 0.5  # noqa: E731
    forcing = lambda t: np.cos(3 * t)  # noqa: E731
    flow = LinearFlow(rate, forcing, 0.0, 3.0, 0.0, pin="end")
    sol = solve_ivp(lambda t, y: rate(t) * y + forcing(t), [3.0, 0.0], [0.0],
                    rtol=1e-12, atol=1e-14, dense_output=True)
    t = np.linspace(0, 3, 61)
    assert np.max(np.abs(flow(t) - sol.sol(t)[0])) < 1e-10
    assert flow(3.0) == 0.0


def test_dense_and_direct_evaluation_agree():
    flow = LinearFlow(lambda t: -t, lambda t: np.exp(t / 3), 0.0, 2.0, 0.7)
    t = np.linspace(0, 2, 333)
    assert np.max(np.abs(flow(t) - flow.exact(t))) < 1e-12


def test_refinement_failure_reports_achieved_error():
    with pytest.raises(QuadratureError) as exc:
        LinearFlow(0.0, lambda t: np.sin(200 * t), 0.0, 10.0, 0.0, panels=1, order=2,
                   rtol=1e-15, max_refinements=1)
    assert exc.value.achieved is not None and exc.value.achieved > 0

"""Discounted revenues of both phases, their aggregates and the revenue gain.

The instantaneous revenue of operator i is ``p_i (x_i + dx_i/dt)``. On the
finite phase it is integrated numerically; on the infinite phase the share is
one exponential plus a constant and the prices are affine in it, so the
discounted integral is a sum of three exponential integrals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .asymmetric import solve_asymmetric
from .errors import ConfigError, QuadratureError, SolverError
from .market import MarketParams
from .riccati import DEFAULT_MODE
from .symmetric import SymSolution, equilibrium_prices_sym, solve_symmetric

QUAD_RTOL = 1e-10


def revenue_rate(solution, t, operator: int):
    """Undiscounted revenue rate ``p_i (x_i + dx_i/dt)`` along a phase solution."""
    p1, p2 = solution.prices(t)
    x1 = solution.x1(t)
    dx1 = solution.share_rate(t)
    if operator == 1:
        return p1 * (x1 + dx1)
    return p2 * (1.0 - x1 - dx1)


def _check_operator(operator):
    if operator not in (1, 2):
        raise ConfigError("must be 1 or 2", "operator")


def finite_revenue(solution, operator: int, rho: float | None = None,
                   rtol: float = QUAD_RTOL) -> tuple[float, float]:
    """``int_0^T e^{-rho t} r_i dt`` by adaptive quadrature; returns ``(value, error)``."""
    _check_operator(operator)
    rho = solution.params.rho if rho is None else rho
    T = solution.T
    if T == 0:
        return 0.0, 0.0

    def f(t):
        return math.exp(-rho * t) * revenue_rate(solution, t, operator)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(f, 0.0, T, epsabs=0.0, epsrel=rtol, limit=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"revenue quadrature did not converge: {exc}") from exc
    if err > 10 * rtol * max(abs(value), 1.0):
        raise QuadratureError("revenue quadrature missed its tolerance", achieved=err)
    return float(value), float(err)


def _exp_terms(solution: SymSolution, operator: int):
    """Coefficients ``(h0, h1, h2)`` with ``r_i = h0 + h1 E + h2 E^2``, ``E = e^{d (t-T)}``."""
    c = solution.coeffs
    p = solution.params
    amp = solution.x1_T - 0.5
    d = c.decay
    slope = (p.s2 - c.k) / 3.0
    p1_mid, p2_mid = equilibrium_prices_sym(c, 0.5)
    if operator == 1:
        return 0.5 * p1_mid, amp * (p1_mid * (1 + d) + 0.5 * slope), slope * amp * amp * (1 + d)
    return 0.5 * p2_mid, -amp * (p2_mid * (1 + d) + 0.5 * slope), slope * amp * amp * (1 + d)


def infinite_revenue(solution: SymSolution, operator: int, rho: float | None = None) -> float:
    """``int_T^inf e^{-rho t} r_i dt`` in closed form."""
    _check_operator(operator)
    rho = solution.params.rho if rho is None else rho
    if not rho > 0:
        raise ConfigError("must be > 0", "rho")
    d = solution.coeffs.decay
    h0, h1, h2 = _exp_terms(solution, operator)
    return math.exp(-rho * solution.T) * (h0 / rho + h1 / (rho - d) + h2 / (rho - 2 * d))


def infinite_revenue_quad(solution: SymSolution, operator: int, rho: float | None = None,
                          cutoff: float = 1e-12) -> float:
    """Brute-force cross-check: quadrature truncated where the discounted
    integrand bound falls below ``cutoff``."""
    _check_operator(operator)
    rho = solution.params.rho if rho is None else rho
    h = _exp_terms(solution, operator)
    bound = sum(abs(v) for v in h) + 1e-300
    span = max(0.0, math.log(bound / cutoff) / rho - solution.T) + 1.0
    T = solution.T
    # split into unit pieces; the integrand is smooth but spans many e-folds
    edges = np.linspace(T, T + span, int(math.ceil(span)) + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, _ = integrate.quad(lambda t: math.exp(-rho * t) * revenue_rate(solution, t, operator),
                              lo, hi, epsabs=0.0, epsrel=1e-12)
        total += v
    return float(total)


def phase_revenue(trajectory, operator: int, rho: float | None = None) -> float:
    """Discounted revenue of ``operator`` over the phase that produced ``trajectory``.

    ``rho`` overrides the discount rate while keeping the trajectory fixed.
    """
    sol = trajectory.solution
    if sol is None:
        raise ConfigError("trajectory carries no solution", "trajectory")
    if trajectory.phase.is_asymmetric:
        return finite_revenue(sol, operator, rho)[0]
    return infinite_revenue(sol, operator, rho)


@dataclass(frozen=True)
class OrientationRevenue:
    """Phase and total revenues with a fixed holder of the contiguous block.

    Pairs are indexed by operator (operator 1 first).
    """

    holder: int
    r_ap: tuple[float, float]
    r_sp: tuple[float, float]
    shares_T: tuple[float, float]
    quadrature_error: float

    @property
    def x1_T(self) -> float:
        return self.shares_T[0]

    @property
    def totals(self) -> tuple[float, float]:
        return self.r_ap[0] + self.r_sp[0], self.r_ap[1] + self.r_sp[1]

    @property
    def gain(self) -> float:
        """A-holder's total over the other operator's total."""
        tot = self.totals
        a, b = (tot[0], tot[1]) if self.holder == 1 else (tot[1], tot[0])
        if b == 0:
            raise SolverError("B-holder revenue is zero; gain undefined")
        return a / b


def swap_roles(rev: OrientationRevenue) -> OrientationRevenue:
    """Relabel the operators. Exact and an involution."""
    return OrientationRevenue(
        holder=3 - rev.holder,
        r_ap=(rev.r_ap[1], rev.r_ap[0]),
        r_sp=(rev.r_sp[1], rev.r_sp[0]),
        shares_T=(rev.shares_T[1], rev.shares_T[0]),
        quadrature_error=rev.quadrature_error,
    )


def orientation_revenue(params: MarketParams, x1_0: float, T: float, holder: int = 1,
                        mode=DEFAULT_MODE, grid: int = 257, on_invalid: str = "warn") -> OrientationRevenue:
    """Solve both phases with ``holder`` advantaged and integrate revenues."""
    coeffs, traj = solve_asymmetric(params, x1_0, T, grid=grid, mode=mode, advantaged=holder,
                                    on_invalid=on_invalid)
    sol = traj.solution
    x1_T = sol.x1_T
    ap, err = [], 0.0
    for op in (1, 2):
        v, e = finite_revenue(sol, op)
        ap.append(v)
        err = max(err, e)
    _, straj = solve_symmetric(params, x1_T, T, mode=mode, on_invalid=on_invalid)
    sp = tuple(infinite_revenue(straj.solution, op) for op in (1, 2))
    return OrientationRevenue(holder, tuple(ap), sp, (float(x1_T), 1.0 - float(x1_T)), err)


@dataclass(frozen=True)
class RevenueReport:
    """Revenues for both allocations of the contiguous block.

    ``r_total_A_to_1`` is ``(R1^A, R2^B)`` and ``r_total_A_to_2`` is
    ``(R1^B, R2^A)``. ``gain`` is ``R1^A / R2^B``.
    """

    params: MarketParams
    x1_0: float
    T: float
    a_to_1: OrientationRevenue
    a_to_2: OrientationRevenue
    method: str

    @property
    def r_ap(self):
        return self.a_to_1.r_ap

    @property
    def r_sp(self):
        return self.a_to_1.r_sp

    @property
    def r_total_A_to_1(self):
        return self.a_to_1.totals

    @property
    def r_total_A_to_2(self):
        return self.a_to_2.totals

    @property
    def gain(self) -> float:
        return revenue_gain(self)

    @property
    def quadrature_error(self) -> float:
        return max(self.a_to_1.quadrature_error, self.a_to_2.quadrature_error)

    def auction_revenues(self) -> dict:
        """Keyword arguments for :class:`~specgame.auction.AuctionInputs`."""
        r1_A, r2_B = self.r_total_A_to_1
        r1_B, r2_A = self.r_total_A_to_2
        return {"r1_A": r1_A, "r2_A": r2_A, "r1_B": r1_B, "r2_B": r2_B}

    def to_dict(self) -> dict:
        return {
            "x1_0": self.x1_0, "T": self.T, "method": self.method,
            "r_ap": list(self.r_ap), "r_sp": list(self.r_sp),
            "r_total_A_to_1": list(self.r_total_A_to_1),
            "r_total_A_to_2": list(self.r_total_A_to_2),
            "gain": self.gain, "quadrature_error": self.quadrature_error,
        }


def aggregate_revenues(params: MarketParams, x1_0: float, T: float, mode=DEFAULT_MODE,
                       method: str = "swap", grid: int = 257, on_invalid: str = "warn") -> RevenueReport:
    """Aggregate revenues for both allocations of the contiguous block.

    ``method="swap"`` obtains the operator-2-holds-A case by relabeling the
    operator-1 solve started from ``1 - x1_0``; ``"explicit"`` solves it
    directly with operator 2 advantaged.
    """
    a_to_1 = orientation_revenue(params, x1_0, T, 1, mode, grid, on_invalid)
    if method == "swap":
        if x1_0 == 0.5:
            mirrored = a_to_1
        else:
            mirrored = orientation_revenue(params, 1.0 - x1_0, T, 1, mode, grid, on_invalid)
        a_to_2 = swap_roles(mirrored)
    elif method == "explicit":
        a_to_2 = orientation_revenue(params, x1_0, T, 2, mode, grid, on_invalid)
    else:
        raise ConfigError("must be 'swap' or 'explicit'", "method")
    return RevenueReport(params, float(x1_0), float(T), a_to_1, a_to_2, method)


def revenue_gain(report: RevenueReport) -> float:
    """``R1^A / R2^B`` for the allocation giving operator 1 the contiguous block."""
    return report.a_to_1.gain

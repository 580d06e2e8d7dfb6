"""Closed-loop Nash pricing on the infinite horizon ``[T, inf)``.

Once both operators offer the same service the game is autonomous, so the
ansatz coefficients are constants: ``k`` is the smallest stationary root of
the Riccati polynomial, ``e1`` and ``e2`` are the stationary points of their
linear equations, and the share relaxes exponentially towards one half.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymmetric import PhaseTrajectory, handle_invalid, validity_flags
from .errors import ConfigError, DegenerateParametersError
from .market import SYMMETRIC, MarketParams, PhaseKind
from .riccati import DEFAULT_MODE, CoefficientSystem, Mode

_SUM_TOL = 1e-8


@dataclass(frozen=True)
class SymCoefficients:
    params: MarketParams
    mode: Mode
    k: float
    e1: float
    e2: float
    decay: float

    @property
    def z(self) -> float:
        return self.e1 - self.e2


def k_radical(params: MarketParams) -> float:
    """Explicit-radical form of the smallest root (matched/printed modes)."""
    b = 11 * params.s_hi + 25 * params.s_lo + 9 * params.rho * params.s1
    return (b - math.sqrt(b * b - 48 * params.s2 ** 2)) / 12.0


def _explicit_e1(params: MarketParams, k: float) -> float:
    a, b, rho, s1, s2 = params.s_lo, params.s_hi, params.rho, params.s1, params.s2
    denom = 6 * k - 13 * a - 5 * b - 9 * rho * s1
    if denom == 0:
        raise DegenerateParametersError("vanishing denominator in the stationary e1")
    return s2 / (3 * (1 + rho)) + (s2 * s2 - 3 * k * (2 * a + b)) / denom


def solve_symmetric_coeffs(params: MarketParams, mode=DEFAULT_MODE) -> SymCoefficients:
    """Stationary coefficients of the infinite-horizon game.

    Raises
    ------
    DegenerateParametersError
        No real root, a vanishing denominator, a non-decaying share path, or
        a violated ``k + e1 + e2 = 0`` identity.
    """
    mode = Mode.parse(mode)
    system = CoefficientSystem.build(params, Mode.MATCHED if mode is Mode.PRINTED else mode)
    k, _ = system.roots()
    z = system.z_forcing(k) / system.z_rate
    if mode is Mode.FEEDBACK:
        mu = system.mu(k)
        if mu == 0:
            raise DegenerateParametersError("vanishing denominator in the stationary e1")
        e1 = -system.nu(k, z, 0.0) / mu
    else:
        e1 = _explicit_e1(params, k)
    e2 = e1 - z
    scale = max(1.0, abs(e1), abs(e2))
    if abs(k + e1 + e2) > _SUM_TOL * scale:
        raise DegenerateParametersError(f"k + e1 + e2 = {k + e1 + e2!r} is not zero")
    decay = 2.0 * (k - params.s_lo - params.s1) / (3.0 * params.s1)
    if not decay < 0:
        raise DegenerateParametersError("share path does not decay; no stationary equilibrium")
    return SymCoefficients(params, mode, k, e1, e2, decay)


def equilibrium_prices_sym(coeffs: SymCoefficients, x1):
    p = coeffs.params
    slope = (p.s2 - coeffs.k) / 3.0
    p1 = (p.s1 + p.s_lo + coeffs.e2 - 2 * coeffs.e1) / 3.0 + slope * x1
    p2 = (p.s1 + p.s_hi + 2 * coeffs.e2 - coeffs.e1) / 3.0 - slope * x1
    return p1, p2


def share_trajectory_sym(coeffs: SymCoefficients, x1_T: float, T: float, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < T):
        raise ValueError(f"symmetric phase starts at T={T}")
    out = 0.5 + (x1_T - 0.5) * np.exp(coeffs.decay * (t_arr - T))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SymSolution:
    """Equilibrium of the infinite-horizon game started at ``(T, x1_T)``."""

    coeffs: SymCoefficients
    x1_T: float
    T: float

    @property
    def params(self):
        return self.coeffs.params

    @property
    def phase(self):
        return PhaseKind(SYMMETRIC)

    def x1(self, t):
        return share_trajectory_sym(self.coeffs, self.x1_T, self.T, t)

    def prices(self, t):
        return equilibrium_prices_sym(self.coeffs, self.x1(t))

    def costates(self, t):
        x = self.x1(t)
        return self.coeffs.k * x + self.coeffs.e1, self.coeffs.k * x + self.coeffs.e2

    def share_rate(self, t):
        return self.coeffs.decay * (self.x1(t) - 0.5)

    def price_slopes(self, t):
        s = (self.params.s2 - self.coeffs.k) / 3.0
        return s, -s

    def sample(self, times) -> PhaseTrajectory:
        times = np.asarray(times, dtype=float)
        x = self.x1(times)
        p1, p2 = equilibrium_prices_sym(self.coeffs, x)
        l1, l2 = self.costates(times)
        flags = validity_flags(self.params, self.phase, p1, p2)
        return PhaseTrajectory(times, p1, p2, x, l1, l2, flags, self.phase, self)


def solve_symmetric(params: MarketParams, x1_T: float, T: float, times=None, mode=DEFAULT_MODE,
                    on_invalid: str = "warn"):
    """Coefficients plus a sampled path; ``times`` defaults to ``T + [0, 10]``."""
    if not 0.0 <= x1_T <= 1.0:
        raise ConfigError("hand-off share must lie in [0, 1]", "x1_T")
    coeffs = solve_symmetric_coeffs(params, mode)
    sol = SymSolution(coeffs, float(x1_T), float(T))
    if times is None:
        times = np.linspace(T, T + 10.0, 257)
    traj = sol.sample(times)
    handle_invalid(traj.validity_flags, on_invalid, "symmetric phase")
    return coeffs, traj

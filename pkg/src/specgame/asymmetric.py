"""Closed-loop Nash pricing on the finite horizon ``[0, T)``.

Before the disadvantaged operator can launch double-speed service, the two
operators play a finite-horizon differential game with zero terminal
costates. With ``lambda_i = k(t) x1 + e_i(t)`` the feedback prices are affine
in the current share, ``k`` has a closed form, and ``e1``, ``z = e1 - e2`` and
the share itself are integrating-factor integrals evaluated by
:class:`~specgame.quadrature.LinearFlow`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ValidityError
from .market import ASYMMETRIC, MarketParams, PhaseKind, strategy_bounds, utility_edge, validity_interval
from .quadrature import LinearFlow
from .riccati import DEFAULT_MODE, CoefficientSystem, Mode

MIN_GRID = 64
# panel width cap; keeps the exponential factors inside one panel below e^0.5
_MAX_PANEL = 0.25


def _panels(T):
    return max(32, int(math.ceil(T / _MAX_PANEL)))


def _const_like(t, value):
    t = np.asarray(t, dtype=float)
    return np.full(t.shape, value) if t.ndim else float(value)


def riccati_roots(params: MarketParams, mode=DEFAULT_MODE) -> tuple[float, float]:
    """Roots ``alpha1 < alpha2`` of the stationary Riccati polynomial."""
    return CoefficientSystem.build(params, mode).roots()


@dataclass(frozen=True, eq=False)
class AsymCoefficients:
    """Time-varying equilibrium coefficients on ``[0, T]``.

    Use :func:`asym_coefficients` to construct. ``k``, ``z``, ``e1``, ``e2``
    and the auxiliaries ``mu``, ``nu``, ``delta``, ``zeta`` are vectorised
    functions of time.
    """

    system: CoefficientSystem
    phase: PhaseKind
    T: float
    alpha1: float
    alpha2: float
    _z_flow: LinearFlow | None = field(default=None, repr=False)
    _e1_flow: LinearFlow | None = field(default=None, repr=False)

    @property
    def params(self) -> MarketParams:
        return self.system.params

    @property
    def mode(self) -> Mode:
        return self.system.mode

    quad_constant_mode = mode

    @property
    def utility_edge(self) -> float:
        return utility_edge(self.params, self.phase)

    @property
    def quadrature_error(self) -> float:
        flows = [f for f in (self._z_flow, self._e1_flow) if f is not None]
        return max((f.error_estimate for f in flows), default=0.0)

    def k(self, t):
        t = np.asarray(t, dtype=float)
        a1, a2 = self.alpha1, self.alpha2
        rate = self.system.q2 * (a1 - a2) / (9.0 * self.params.s1)
        decay = np.exp(rate * (self.T - t))
        out = a1 * (1.0 - decay) / (1.0 - (a1 / a2) * decay)
        return out if out.ndim else float(out)

    def k_dot(self, t):
        return self.system.riccati_rate(self.k(t))

    def z(self, t):
        if self._z_flow is not None:
            return self._z_flow(t)
        t = np.asarray(t, dtype=float)
        r = self.system.z_rate
        out = 2.0 * self.params.s2 / (3.0 * r) * (1.0 - np.exp(r * (t - self.T)))
        return out if out.ndim else float(out)

    def e1(self, t):
        if self._e1_flow is None:
            return _const_like(t, 0.0)
        return self._e1_flow(t)

    def e2(self, t):
        return self.e1(t) - self.z(t)

    def mu(self, t):
        return self.system.mu(self.k(t))

    def nu(self, t):
        return self.system.nu(self.k(t), self.z(t), self.utility_edge)

    def delta(self, t):
        p = self.params
        return 2.0 * (self.k(t) - p.s_hi - 2.0 * p.s_lo) / (3.0 * p.s1)

    def zeta(self, t):
        p = self.params
        return (self.utility_edge + 2.0 * p.s_lo + p.s_hi + self.e1(t) + self.e2(t)) / (3.0 * p.s1)


def asym_coefficients(params: MarketParams, T: float, mode=DEFAULT_MODE, advantaged: int = 1,
                      rtol: float = 1e-10) -> AsymCoefficients:
    if not T >= 0 or not math.isfinite(T):
        raise ConfigError(f"deployment time must be finite and >= 0, got {T!r}", "T")
    system = CoefficientSystem.build(params, mode)
    alpha1, alpha2 = system.roots()
    phase = PhaseKind(ASYMMETRIC, advantaged)
    coeffs = AsymCoefficients(system, phase, float(T), alpha1, alpha2)
    if T == 0:
        return coeffs
    panels = _panels(T)
    z_flow = None
    if system.z_k != 0.0:
        z_flow = LinearFlow(system.z_rate, lambda t: -system.z_forcing(coeffs.k(t)), 0.0, T, 0.0,
                            pin="end", panels=panels, rtol=rtol)
        object.__setattr__(coeffs, "_z_flow", z_flow)
    e1_flow = LinearFlow(coeffs.mu, coeffs.nu, 0.0, T, 0.0, pin="end", panels=panels, rtol=rtol)
    object.__setattr__(coeffs, "_e1_flow", e1_flow)
    return coeffs


def _check_time(coeffs, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > coeffs.T):
        raise ValueError(f"time outside [0, {coeffs.T}]")


def k_at(coeffs: AsymCoefficients, t):
    _check_time(coeffs, t)
    return coeffs.k(t)


def z_at(params: MarketParams, T: float, t, mode=DEFAULT_MODE):
    coeffs = asym_coefficients(params, T, mode)
    _check_time(coeffs, t)
    return coeffs.z(t)


def costate_offsets(params: MarketParams, T: float, grid, mode=DEFAULT_MODE, advantaged: int = 1):
    """Sample ``(e1, e2)`` on ``grid`` (which must lie in ``[0, T]``)."""
    coeffs = asym_coefficients(params, T, mode, advantaged)
    _check_time(coeffs, grid)
    return coeffs.e1(grid), coeffs.e2(grid)


def equilibrium_prices(coeffs: AsymCoefficients, t, x1):
    """Feedback prices ``(p1, p2)`` at time ``t`` and share ``x1``; never clamped."""
    p = coeffs.params
    du = coeffs.utility_edge
    k, z, e1 = coeffs.k(t), coeffs.z(t), coeffs.e1(t)
    e2 = e1 - z
    slope = (p.s2 - k) / 3.0
    p1 = (du + p.s_hi + 2.0 * p.s_lo - e1 - z) / 3.0 + slope * x1
    p2 = (-du + 2.0 * p.s_hi + p.s_lo + e2 - z) / 3.0 - slope * x1
    return p1, p2


@dataclass(frozen=True, eq=False)
class PhaseTrajectory:
    """Sampled equilibrium path of one phase.

    ``validity_flags`` is True where the price gap lies inside the open
    validity interval and both prices lie inside their strategy spaces.
    ``solution`` links back to the object that generated the samples so that
    residual checks and revenue quadrature can evaluate between samples.
    """

    times: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    x1: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    validity_flags: np.ndarray
    phase: PhaseKind
    solution: object = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("times", "p1", "p2", "x1", "lambda1", "lambda2", "validity_flags"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def x2(self) -> np.ndarray:
        return 1.0 - self.x1

    @property
    def valid(self) -> bool:
        return bool(np.all(self.validity_flags))

    def __len__(self):
        return len(self.times)

    def with_prices(self, p1, p2) -> "PhaseTrajectory":
        """Copy with replaced price samples; used to probe the residual checks."""
        return PhaseTrajectory(self.times, p1, p2, self.x1, self.lambda1, self.lambda2,
                               self.validity_flags, self.phase, self.solution)


def validity_flags(params: MarketParams, phase: PhaseKind, p1, p2) -> np.ndarray:
    lo, hi = validity_interval(params, phase)
    (l1, h1), (l2, h2) = strategy_bounds(params, phase)
    gap = np.asarray(p1) - np.asarray(p2)
    return (gap > lo) & (gap < hi) & (p1 >= l1) & (p1 <= h1) & (p2 >= l2) & (p2 <= h2)


def handle_invalid(flags, on_invalid, where):
    if np.all(flags):
        return
    msg = f"{where}: {int(np.size(flags) - np.count_nonzero(flags))} samples leave the validity region"
    if on_invalid == "error":
        raise ValidityError(msg)
    if on_invalid == "warn":
        warnings.warn(msg, RuntimeWarning, stacklevel=3)


@dataclass(frozen=True, eq=False)
class AsymSolution:
    """Equilibrium of the finite-horizon game from a given initial share."""

    coeffs: AsymCoefficients
    x1_0: float
    _x_flow: LinearFlow | None = field(default=None, repr=False)

    @property
    def params(self):
        return self.coeffs.params

    @property
    def phase(self):
        return self.coeffs.phase

    @property
    def T(self):
        return self.coeffs.T

    def x1(self, t):
        if self._x_flow is None:
            return _const_like(t, self.x1_0)
        return self._x_flow(t)

    @property
    def x1_T(self) -> float:
        return float(self.x1(self.T))

    def prices(self, t):
        return equilibrium_prices(self.coeffs, t, self.x1(t))

    def costates(self, t):
        x = self.x1(t)
        k = self.coeffs.k(t)
        return k * x + self.coeffs.e1(t), k * x + self.coeffs.e2(t)

    def share_rate(self, t):
        """Right-hand side of the share ODE along the equilibrium path."""
        return self.coeffs.zeta(t) + self.coeffs.delta(t) * self.x1(t)

    def price_slopes(self, t):
        """``d p_i / d x1`` of the feedback rules."""
        s = (self.params.s2 - self.coeffs.k(t)) / 3.0
        return s, -s

    def sample(self, times) -> PhaseTrajectory:
        times = np.asarray(times, dtype=float)
        x = self.x1(times)
        p1, p2 = equilibrium_prices(self.coeffs, times, x)
        l1, l2 = self.costates(times)
        flags = validity_flags(self.params, self.phase, p1, p2)
        return PhaseTrajectory(times, p1, p2, x, l1, l2, flags, self.phase, self)


def solve_asymmetric(params: MarketParams, x1_0: float, T: float, grid=257, mode=DEFAULT_MODE,
                     advantaged: int = 1, on_invalid: str = "warn", rtol: float = 1e-10):
    """Solve the finite-horizon game.

    Parameters
    ----------
    grid : int or array_like
        Number of uniform samples on ``[0, T]`` (at least 64), or explicit
        sample times.
    on_invalid : {"warn", "error", "ignore"}
        Action when a sample leaves the validity region; flags are recorded
        on the trajectory in every case.

    Returns
    -------
    (AsymCoefficients, PhaseTrajectory)
        The trajectory's ``solution`` attribute is the :class:`AsymSolution`;
        ``solution.x1_T`` is the hand-off share for the symmetric phase.
    """
    if not 0.0 <= x1_0 <= 1.0:
        raise ConfigError("initial share must lie in [0, 1]", "x1_0")
    if on_invalid not in ("warn", "error", "ignore"):
        raise ConfigError("must be warn, error or ignore", "on_invalid")
    coeffs = asym_coefficients(params, T, mode, advantaged, rtol)
    if T == 0:
        sol = AsymSolution(coeffs, float(x1_0))
        return coeffs, sol.sample(np.empty(0))
    x_flow = LinearFlow(coeffs.delta, coeffs.zeta, 0.0, T, x1_0, pin="start", panels=_panels(T), rtol=rtol)
    sol = AsymSolution(coeffs, float(x1_0), x_flow)
    if np.ndim(grid) == 0:
        n = int(grid)
        if n < MIN_GRID:
            raise ConfigError(f"grid needs at least {MIN_GRID} points", "grid")
        times = np.linspace(0.0, T, n)
    else:
        times = np.asarray(grid, dtype=float)
        _check_time(coeffs, times)
    traj = sol.sample(times)
    handle_invalid(traj.validity_flags, on_invalid, "asymmetric phase")
    return coeffs, traj

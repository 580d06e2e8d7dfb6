"""Independent verification of the closed-form equilibria.

Three checks live here, none of which uses the closed forms themselves:

* :func:`backward_induction` discretises the pricing game in time and solves
  it by dynamic programming. Each stage is a two-player game with quadratic
  payoffs and affine dynamics, so its Nash point is one 2x2 linear solve and
  the value functions stay exactly quadratic. As the step shrinks this
  converges to the feedback Nash equilibrium of the continuous game.
* :func:`residual_report` evaluates the Hamiltonian necessary conditions along
  a sampled trajectory by finite differences.
* :func:`auction_best_response` grid-searches the expected spiteful payoff
  against a uniformly bidding rival.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .auction import AuctionInputs
from .errors import ConfigError, OracleError
from .market import MarketParams, PhaseKind, share_rate, utility_edge


@dataclass(frozen=True)
class DiscreteGameSetup:
    """Discretised pricing game.

    ``horizon`` is the finite deployment time, or ``None`` for the
    infinite-horizon phase, which is iterated to a fixed point.
    """

    params: MarketParams
    phase: PhaseKind
    dt: float
    horizon: float | None = None
    tol: float = 1e-10
    max_steps: int = 5_000_000

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("must be > 0", "dt")
        if self.horizon is not None:
            if not self.horizon > 0:
                raise ConfigError("must be > 0", "horizon")
            if self.dt > self.horizon / 64:
                raise ConfigError("must be at most horizon / 64", "dt")


@dataclass(frozen=True)
class QuadraticValue:
    """``V(x1) = a x1^2 + b x1 + c`` for one operator."""

    a: float
    b: float
    c: float

    def __call__(self, x):
        return (self.a * x + self.b) * x + self.c

    def slope(self, x):
        return 2.0 * self.a * x + self.b


@dataclass(frozen=True, eq=False)
class OracleSolution:
    """Output of :func:`backward_induction`.

    For a finite horizon ``times`` has ``N + 1`` entries and the feedback
    arrays ``N`` (one per stage); ``k1[n] = V1''`` and ``e1[n] = V1'(0)`` are
    the discrete analogues of the costate coefficients. For the infinite
    horizon every array has length one (the fixed point).
    """

    setup: DiscreteGameSetup
    times: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    p1_const: np.ndarray
    p1_slope: np.ndarray
    p2_const: np.ndarray
    p2_slope: np.ndarray
    values: tuple[QuadraticValue, QuadraticValue]
    steps: int

    @property
    def dt(self) -> float:
        if self.setup.horizon is None:
            return self.setup.dt
        return self.setup.horizon / (len(self.times) - 1)

    def prices(self, n, x):
        return self.p1_const[n] + self.p1_slope[n] * x, self.p2_const[n] + self.p2_slope[n] * x

    def simulate(self, x1_0: float, steps: int | None = None):
        """Forward Euler path under the discrete feedback rules.

        Returns ``(times, x1, p1, p2)``; prices are those applied on each stage,
        so they have one entry fewer than ``x1`` for a finite horizon.
        """
        p = self.setup.params
        du = utility_edge(p, self.setup.phase)
        dt = self.dt
        finite = self.setup.horizon is not None
        n_steps = len(self.p1_const) if finite else int(steps or 0)
        x = np.empty(n_steps + 1)
        p1 = np.empty(n_steps)
        p2 = np.empty(n_steps)
        x[0] = x1_0
        for n in range(n_steps):
            m = n if finite else 0
            p1[n], p2[n] = self.prices(m, x[n])
            f = (du - p1[n] + p2[n] + p.s_lo) / p.s1 - 2.0 * p.s_lo / p.s1 * x[n]
            x[n + 1] = x[n] + dt * f
        times = np.arange(n_steps + 1) * dt
        return times, x, p1, p2


def _stage(A1, B1, C1, A2, B2, C2, f0, fx, s1, dt, beta):
    """One backward step: stage Nash feedback plus updated value coefficients."""
    inv = 1.0 / s1
    m11 = -2.0 * inv + 2.0 * beta * A1 * dt * inv * inv
    m12 = inv - 2.0 * beta * A1 * dt * inv * inv
    m21 = inv - 2.0 * beta * A2 * dt * inv * inv
    m22 = -2.0 * inv + 2.0 * beta * A2 * dt * inv * inv
    c1 = f0 - beta * inv * (2.0 * A1 * dt * f0 + B1)
    x1 = 1.0 + fx - beta * inv * 2.0 * A1 * (1.0 + dt * fx)
    c2 = 1.0 - f0 + beta * inv * (2.0 * A2 * dt * f0 + B2)
    x2 = -1.0 - fx + beta * inv * 2.0 * A2 * (1.0 + dt * fx)
    det = m11 * m22 - m12 * m21
    if abs(det) < 1e-14 * (abs(m11 * m22) + abs(m12 * m21)):
        raise OracleError("singular stage game")
    # second-order conditions: each stage payoff must be concave in own price
    if not (m11 < 0 and m22 < 0):
        raise OracleError("stage payoff not concave in own price")
    g1 = (-c1 * m22 + c2 * m12) / det
    g2 = (-c2 * m11 + c1 * m21) / det
    h1 = (-x1 * m22 + x2 * m12) / det
    h2 = (-x2 * m11 + x1 * m21) / det
    F0 = f0 + (g2 - g1) * inv
    Fx = fx + (h2 - h1) * inv
    X0 = dt * F0
    X1 = 1.0 + dt * Fx
    one_fx = 1.0 + Fx
    nA1 = dt * h1 * one_fx + beta * A1 * X1 * X1
    nB1 = dt * (g1 * one_fx + h1 * F0) + beta * (2.0 * A1 * X0 * X1 + B1 * X1)
    nC1 = dt * g1 * F0 + beta * (A1 * X0 * X0 + B1 * X0 + C1)
    nA2 = -dt * h2 * one_fx + beta * A2 * X1 * X1
    nB2 = dt * (h2 * (1.0 - F0) - g2 * one_fx) + beta * (2.0 * A2 * X0 * X1 + B2 * X1)
    nC2 = dt * g2 * (1.0 - F0) + beta * (A2 * X0 * X0 + B2 * X0 + C2)
    return (g1, h1, g2, h2), (nA1, nB1, nC1, nA2, nB2, nC2)


def backward_induction(setup: DiscreteGameSetup) -> OracleSolution:
    """Solve the discretised game by dynamic programming.

    Raises
    ------
    OracleError
        A singular or non-concave stage game, diverging value coefficients, or
        no fixed point within ``max_steps`` (infinite horizon).
    """
    p = setup.params
    du = utility_edge(p, setup.phase)
    f0 = (du + p.s_lo) / p.s1
    fx = -2.0 * p.s_lo / p.s1
    s1 = p.s1
    bound = 1e6 * (1.0 + p.s1 + p.u0)

    if setup.horizon is not None:
        n = max(64, int(round(setup.horizon / setup.dt)))
        dt = setup.horizon / n
        beta = math.exp(-p.rho * dt)
        A1 = B1 = C1 = A2 = B2 = C2 = 0.0
        k1 = np.zeros(n + 1)
        k2 = np.zeros(n + 1)
        e1 = np.zeros(n + 1)
        e2 = np.zeros(n + 1)
        g1 = np.empty(n)
        h1 = np.empty(n)
        g2 = np.empty(n)
        h2 = np.empty(n)
        for i in range(n - 1, -1, -1):
            (g1[i], h1[i], g2[i], h2[i]), (A1, B1, C1, A2, B2, C2) = _stage(
                A1, B1, C1, A2, B2, C2, f0, fx, s1, dt, beta)
            if not (abs(A1) < bound and abs(A2) < bound):
                raise OracleError(f"value coefficients diverged at step {i}")
            k1[i], k2[i], e1[i], e2[i] = 2.0 * A1, 2.0 * A2, B1, B2
        times = np.linspace(0.0, setup.horizon, n + 1)
        values = (QuadraticValue(A1, B1, C1), QuadraticValue(A2, B2, C2))
        return OracleSolution(setup, times, k1, k2, e1, e2, g1, h1, g2, h2, values, n)

    dt = setup.dt
    beta = math.exp(-p.rho * dt)
    A1 = B1 = C1 = A2 = B2 = C2 = 0.0
    for step in range(1, setup.max_steps + 1):
        fb, (nA1, nB1, nC1, nA2, nB2, nC2) = _stage(A1, B1, C1, A2, B2, C2, f0, fx, s1, dt, beta)
        change = max(abs(nA1 - A1), abs(nB1 - B1), abs(nA2 - A2), abs(nB2 - B2))
        A1, B1, C1, A2, B2, C2 = nA1, nB1, nC1, nA2, nB2, nC2
        if not (abs(A1) < bound and abs(A2) < bound):
            raise OracleError(f"value coefficients diverged at step {step}")
        # per-step change scales with dt, so test the rate of change
        if change < setup.tol * dt:
            break
    else:
        raise OracleError(f"no fixed point after {setup.max_steps} steps")
    arr = lambda v: np.array([v])  # noqa: E731
    values = (QuadraticValue(A1, B1, C1), QuadraticValue(A2, B2, C2))
    return OracleSolution(setup, arr(0.0), arr(2 * A1), arr(2 * A2), arr(B1), arr(B2),
                          arr(fb[0]), arr(fb[1]), arr(fb[2]), arr(fb[3]), values, step)


# -- necessary-condition residuals -------------------------------------------

DEFAULT_TOLERANCES = {"foc": 1e-5, "adjoint": 1e-5, "boundary": 1e-10, "ode": 1e-5}


@dataclass(frozen=True)
class ResidualReport:
    phase: str
    foc: float
    adjoint: float
    boundary: float
    ode: float
    max_condition: bool
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    @property
    def failures(self) -> list[str]:
        out = [name for name in ("foc", "adjoint", "boundary", "ode")
               if not getattr(self, name) <= self.tolerances[name]]
        if not self.max_condition:
            out.append("max_condition")
        return out

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["status"] = self.status
        return d


def _derivative(fn, t, h):
    """Fourth-order central difference of a vectorised function."""
    d1 = (fn(t + h) - fn(t - h)) / (2 * h)
    d2 = (fn(t + h / 2) - fn(t - h / 2)) / h
    return (4 * d2 - d1) / 3


def _hamiltonians(params, du, x, p1, p2, lam1, lam2):
    f = (du - p1 + p2 + params.s_lo) / params.s1 - 2.0 * params.s_lo / params.s1 * x
    return p1 * (x + f) + lam1 * f, p2 * (1.0 - x - f) + lam2 * f


def residual_report(trajectory, tolerances=None, adjoint_form: str = "full",
                    fd_step: float = 1e-3) -> ResidualReport:
    """Necessary-condition residuals of a sampled equilibrium path.

    Parameters
    ----------
    trajectory : PhaseTrajectory
        Output of either phase solver. Its ``solution`` is used to
        differentiate costates and shares between samples.
    adjoint_form : {"full", "explicit"}
        ``full`` uses the rival's actual feedback slope ``d p_j / d x1``;
        ``explicit`` replaces it by the costate-free part ``+/- s2 / 3``.
    """
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    sol = trajectory.solution
    if sol is None:
        raise ConfigError("trajectory carries no solution to differentiate", "trajectory")
    params = sol.params
    phase = trajectory.phase
    du = utility_edge(params, phase)
    t = trajectory.times
    x, p1, p2 = trajectory.x1, trajectory.p1, trajectory.p2
    l1, l2 = trajectory.lambda1, trajectory.lambda2
    if len(t) == 0:
        return ResidualReport(phase.tag, 0.0, 0.0, 0.0, 0.0, True, tol)

    # first-order and maximum conditions, central differences in own price
    d = 1e-3
    h1p, _ = _hamiltonians(params, du, x, p1 + d, p2, l1, l2)
    h1m, _ = _hamiltonians(params, du, x, p1 - d, p2, l1, l2)
    _, h2p = _hamiltonians(params, du, x, p1, p2 + d, l1, l2)
    _, h2m = _hamiltonians(params, du, x, p1, p2 - d, l1, l2)
    h1, h2 = _hamiltonians(params, du, x, p1, p2, l1, l2)
    foc = float(max(np.max(np.abs(h1p - h1m)), np.max(np.abs(h2p - h2m))) / (2 * d))
    max_ok = bool(np.all(h1 >= np.maximum(h1p, h1m)) and np.all(h2 >= np.maximum(h2p, h2m)))

    finite = phase.is_asymmetric
    lo = 0.0 if finite else sol.T
    hi = sol.T if finite else np.inf
    interior = (t - fd_step > lo) & (t + fd_step < hi)
    ti = t[interior]
    adjoint = ode = 0.0
    if ti.size:
        s1, a = params.s1, params.s_lo
        fx = -2.0 * a / s1
        xi, p1i, p2i = x[interior], p1[interior], p2[interior]
        l1i, l2i = l1[interior], l2[interior]
        dl1 = _derivative(lambda s: sol.costates(s)[0], ti, fd_step)
        dl2 = _derivative(lambda s: sol.costates(s)[1], ti, fd_step)
        if adjoint_form == "full":
            slope1, slope2 = sol.price_slopes(ti)
        elif adjoint_form == "explicit":
            slope1, slope2 = params.s2 / 3.0, -params.s2 / 3.0
        else:
            raise ConfigError("must be 'full' or 'explicit'", "adjoint_form")
        dH1dx = p1i * (1.0 + fx) + l1i * fx
        dH2dx = -p2i * (1.0 + fx) + l2i * fx
        rhs1 = params.rho * l1i - dH1dx - (p1i + l1i) / s1 * slope2
        rhs2 = params.rho * l2i - dH2dx - (p2i - l2i) / s1 * slope1
        adjoint = float(max(np.max(np.abs(dl1 - rhs1)), np.max(np.abs(dl2 - rhs2))))
        dx = _derivative(sol.x1, ti, fd_step)
        rate = share_rate(params, phase, xi, p1i, p2i, check=False)
        ode = float(np.max(np.abs(dx - rate)))

    if finite:
        end1, end2 = sol.costates(sol.T)
        boundary = float(max(abs(end1), abs(end2)))
    else:
        # transversality: discounted costates vanish far out on the bounded path
        far = sol.T + 100.0 / params.rho
        f1, f2 = sol.costates(far)
        boundary = float(math.exp(-params.rho * far) * max(abs(f1), abs(f2)))
    return ResidualReport(phase.tag, foc, adjoint, boundary, ode, max_ok, tol)


# -- auction best response -----------------------------------------------------

def expected_spiteful_payoff(inputs: AuctionInputs, bid, player: int = 1):
    """Expected objective of ``player`` bidding ``bid`` against a rival bidding
    uniformly on ``[c_A, R_j^A]``; closed form of the piecewise-linear integrals."""
    i, j = player, 2 if player == 1 else 1
    g = inputs.gamma
    lo, hi = inputs.c_A, inputs.r_A(j)
    if not hi > lo:
        raise ConfigError("rival's bid support [c_A, R_j^A] is empty", "r_A")
    b = np.clip(np.asarray(bid, dtype=float), lo, hi)
    win = ((1 - g) * (inputs.r_A(i) - b) - g * inputs.pi_B(j)) * (b - lo)
    lose = (1 - g) * inputs.pi_B(i) * (hi - b) - g * 0.5 * (hi - b) ** 2
    return (win + lose) / (hi - lo)


def auction_best_response(inputs: AuctionInputs, player: int = 1, grid_n: int = 100_001):
    """Grid argmax of :func:`expected_spiteful_payoff` over ``[c_A, R_j^A]``.

    Returns ``(best_bid, bids, payoffs)``.
    """
    if grid_n < 10_000:
        raise ConfigError("grid needs at least 1e4 points", "grid_n")
    j = 2 if player == 1 else 1
    bids = np.linspace(inputs.c_A, inputs.r_A(j), int(grid_n))
    payoffs = expected_spiteful_payoff(inputs, bids, player)
    return float(bids[int(np.argmax(payoffs))]), bids, payoffs


# -- closed form versus backward induction -----------------------------------

COEFF_TOL = 1e-3
TRAJ_TOL = 5e-3


@dataclass(frozen=True)
class OracleComparison:
    """Largest deviations between a closed-form solve and the oracle.

    ``k_err`` and ``e_err`` compare coefficients at the stage times,
    ``price_err`` the feedback prices at the oracle's states, ``share_err``
    the share paths. ``T`` is ``None`` for the infinite-horizon phase.
    """

    mode: str
    T: float | None
    dt: float
    k_err: float
    e_err: float
    price_err: float
    share_err: float
    coeff_tol: float = COEFF_TOL
    traj_tol: float = TRAJ_TOL

    @property
    def passed(self) -> bool:
        return (max(self.k_err, self.e_err) <= self.coeff_tol
                and max(self.price_err, self.share_err) <= self.traj_tol)

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["status"] = self.status
        return d


def _stage_indices(n, samples=256):
    return np.unique(np.linspace(0, n - 1, min(n, samples)).round().astype(int))


def compare_finite(params: MarketParams, x1_0: float, T: float, mode=None, dt: float = 1e-4,
                   oracle: OracleSolution | None = None, advantaged: int = 1) -> OracleComparison:
    """Closed-form finite-horizon equilibrium against backward induction."""
    from .asymmetric import solve_asymmetric
    from .riccati import DEFAULT_MODE, Mode

    mode = Mode.parse(mode or DEFAULT_MODE)
    phase = PhaseKind("asymmetric", advantaged)
    if oracle is None:
        oracle = backward_induction(DiscreteGameSetup(params, phase, dt, T))
    coeffs, traj = solve_asymmetric(params, x1_0, T, mode=mode, advantaged=advantaged,
                                    on_invalid="ignore")
    sol = traj.solution
    n = len(oracle.p1_const)
    idx = _stage_indices(n)
    t = oracle.times[idx]
    k = coeffs.k(t)
    k_err = float(max(np.max(np.abs(k - oracle.k1[idx])), np.max(np.abs(k - oracle.k2[idx]))))
    e_err = float(max(np.max(np.abs(coeffs.e1(t) - oracle.e1[idx])),
                      np.max(np.abs(coeffs.e2(t) - oracle.e2[idx]))))
    times, x, p1, p2 = oracle.simulate(x1_0)
    cp1, cp2 = sol.prices(times[idx])
    price_err = float(max(np.max(np.abs(cp1 - p1[idx])), np.max(np.abs(cp2 - p2[idx]))))
    share_err = float(np.max(np.abs(sol.x1(times) - x)))
    return OracleComparison(mode.value, float(T), oracle.dt, k_err, e_err, price_err, share_err)


def compare_infinite(params: MarketParams, mode=None, dt: float = 1e-4, x1_T: float = 0.7,
                     horizon: float = 10.0, oracle: OracleSolution | None = None) -> OracleComparison:
    """Stationary closed-form coefficients against the oracle's fixed point."""
    from .riccati import DEFAULT_MODE, Mode
    from .symmetric import SymSolution, solve_symmetric_coeffs

    mode = Mode.parse(mode or DEFAULT_MODE)
    if oracle is None:
        oracle = backward_induction(DiscreteGameSetup(params, PhaseKind("symmetric"), dt))
    c = solve_symmetric_coeffs(params, mode)
    k_err = float(max(abs(c.k - oracle.k1[0]), abs(c.k - oracle.k2[0])))
    e_err = float(max(abs(c.e1 - oracle.e1[0]), abs(c.e2 - oracle.e2[0])))
    steps = int(round(horizon / oracle.dt))
    times, x, p1, p2 = oracle.simulate(x1_T, steps)
    sol = SymSolution(c, x1_T, 0.0)
    idx = _stage_indices(steps)
    cp1, cp2 = sol.prices(times[idx])
    price_err = float(max(np.max(np.abs(cp1 - p1[idx])), np.max(np.abs(cp2 - p2[idx]))))
    share_err = float(np.max(np.abs(sol.x1(times) - x)))
    return OracleComparison(mode.value, None, oracle.dt, k_err, e_err, price_err, share_err)


@dataclass(frozen=True)
class Adjudication:
    """Deviation of each coefficient mode from the step-extrapolated oracle.

    ``oracle_error`` estimates the error of the oracle run at ``dt`` from the
    change between steps ``2 dt`` and ``dt`` (first-order convergence), taken
    over ``k`` along the horizon. ``deviation[mode]`` is the largest distance
    of that mode's ``k(t)`` from the extrapolated oracle.
    """

    T: float
    dt: float
    oracle_error: float
    deviation: dict

    def ratio(self, mode) -> float:
        return self.deviation[mode] / self.oracle_error

    def to_dict(self) -> dict:
        return {"T": self.T, "dt": self.dt, "oracle_error": self.oracle_error,
                "deviation": dict(self.deviation),
                "ratio": {m: self.ratio(m) for m in self.deviation}}


def adjudicate(params: MarketParams, T: float, dt: float = 1e-4, modes=None) -> Adjudication:
    """Compare every coefficient mode with a Richardson-extrapolated oracle."""
    from .asymmetric import asym_coefficients
    from .riccati import Mode

    modes = [Mode.parse(m) for m in (modes or list(Mode))]
    phase = PhaseKind("asymmetric", 1)
    fine = backward_induction(DiscreteGameSetup(params, phase, dt, T))
    coarse = backward_induction(DiscreteGameSetup(params, phase, 2 * dt, T))
    # coarse stage n sits at the same time as fine stage 2n
    idx = _stage_indices(len(coarse.p1_const))
    t = coarse.times[idx]
    k_fine = fine.k1[2 * idx]
    k_star = 2 * k_fine - coarse.k1[idx]
    oracle_error = float(np.max(np.abs(k_fine - k_star)))
    deviation = {}
    for m in modes:
        k = asym_coefficients(params, T, m).k(t)
        deviation[m.value] = float(np.max(np.abs(k - k_star)))
    return Adjudication(float(T), fine.dt, oracle_error, deviation)

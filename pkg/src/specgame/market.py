"""Economic primitives and user switching dynamics of the two-operator market.

Users carry a net switching cost drawn uniformly from ``[-s_lo, s_hi]``. A
user moves to the rival when the utility gap net of prices exceeds that cost,
which makes both switching masses affine in the price gap and the share of
operator 1 a linear ODE in its own level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .errors import ConfigError, ValidityError

ASYMMETRIC = "asymmetric"
SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class MarketParams:
    """Market primitives.

    Parameters
    ----------
    u0 : float
        Reserve utility of normal service.
    eta : float
        Relative utility premium of double-speed service, in (0, 1).
    rho : float
        Discount rate per unit time.
    s_lo : float
        Largest net subsidy a user can receive when switching.
    s_hi : float
        Largest net switching cost a user can face.
    """

    u0: float = 10.0
    eta: float = 0.5
    rho: float = 0.5
    s_lo: float = 5.0
    s_hi: float = 10.0

    def __post_init__(self):
        for name in ("u0", "eta", "rho", "s_lo", "s_hi"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(f"must be a finite number, got {value!r}", name)
        if self.u0 <= 0:
            raise ConfigError("must be > 0", "u0")
        # eta = 0 is admitted as the no-premium limit used by symmetry checks
        if not 0 <= self.eta < 1:
            raise ConfigError("must lie in [0, 1)", "eta")
        if self.rho <= 0:
            raise ConfigError("must be > 0", "rho")
        if self.s_lo <= 0:
            raise ConfigError("must be > 0", "s_lo")
        if self.s_hi < self.s_lo:
            raise ConfigError("must be >= s_lo", "s_hi")

    @property
    def s1(self) -> float:
        return self.s_lo + self.s_hi

    @property
    def s2(self) -> float:
        return self.s_hi - self.s_lo

    def replace(self, **changes) -> "MarketParams":
        fields = {k: getattr(self, k) for k in ("u0", "eta", "rho", "s_lo", "s_hi")}
        fields.update(changes)
        return MarketParams(**fields)


@dataclass(frozen=True)
class PhaseKind:
    """Which phase is being played and which operator holds the contiguous block."""

    tag: Literal["asymmetric", "symmetric"] = ASYMMETRIC
    advantaged: int = 1

    def __post_init__(self):
        if self.tag not in (ASYMMETRIC, SYMMETRIC):
            raise ConfigError(f"unknown phase {self.tag!r}", "phase")
        if self.advantaged not in (1, 2):
            raise ConfigError("must be 1 or 2", "advantaged")

    @property
    def is_asymmetric(self) -> bool:
        return self.tag == ASYMMETRIC


@dataclass(frozen=True)
class MarketState:
    """Market share of operator 1; operator 2 holds the rest (full coverage)."""

    x1: float

    def __post_init__(self):
        if not 0.0 <= self.x1 <= 1.0:
            raise ConfigError("market share must lie in [0, 1]", "x1")

    @property
    def x2(self) -> float:
        return 1.0 - self.x1


def utility_edge(params: MarketParams, phase: PhaseKind) -> float:
    """Utility advantage of operator 1 over operator 2 in ``phase``."""
    if not phase.is_asymmetric:
        return 0.0
    edge = params.eta * params.u0
    return edge if phase.advantaged == 1 else -edge


def validity_interval(params: MarketParams, phase: PhaseKind) -> tuple[float, float]:
    """Open interval of price gaps ``p1 - p2`` keeping both switching masses in (0, 1)."""
    du = utility_edge(params, phase)
    return du - params.s_lo, du + params.s_lo


def check_price_gap(params: MarketParams, phase: PhaseKind, dp: float) -> None:
    lo, hi = validity_interval(params, phase)
    if not dp > lo:
        raise ValidityError(f"price gap {dp!r} <= lower bound {lo!r}", bound="lower", value=dp)
    if not dp < hi:
        raise ValidityError(f"price gap {dp!r} >= upper bound {hi!r}", bound="upper", value=dp)


def switching_masses(params: MarketParams, phase: PhaseKind, dp: float) -> tuple[float, float]:
    """Return ``(q21, q12)``, the per-unit-time switching fractions 2->1 and 1->2.

    ``dp`` is the price gap ``p1 - p2``; it must lie strictly inside
    :func:`validity_interval`.
    """
    check_price_gap(params, phase, dp)
    du = utility_edge(params, phase)
    q21 = (du - dp + params.s_lo) / params.s1
    q12 = (-du + dp + params.s_lo) / params.s1
    return q21, q12


def share_rate(
    params: MarketParams,
    phase: PhaseKind,
    state: MarketState | float,
    p1: float,
    p2: float,
    *,
    operator: int = 1,
    check: bool = True,
) -> float:
    """Time derivative of an operator's market share under prices ``(p1, p2)``.

    With ``check=False`` the affine formula is evaluated without the
    validity test; array arguments are then accepted as well.
    """
    x1 = state.x1 if isinstance(state, MarketState) else state
    if check:
        check_price_gap(params, phase, p1 - p2)
    du = utility_edge(params, phase)
    rate = (du - p1 + p2 + params.s_lo) / params.s1 - (2.0 * params.s_lo / params.s1) * x1
    return rate if operator == 1 else -rate


def strategy_bounds(params: MarketParams, phase: PhaseKind) -> tuple[tuple[float, float], tuple[float, float]]:
    """Admissible price ranges of operators 1 and 2.

    The operator offering double-speed service may charge up to
    ``(1 + eta) u0``; the other one up to ``u0``.
    """
    premium = (1.0 + params.eta) * params.u0
    if not phase.is_asymmetric:
        return (0.0, premium), (0.0, premium)
    if phase.advantaged == 1:
        return (0.0, premium), (0.0, params.u0)
    return (0.0, params.u0), (0.0, premium)

"""First-price sealed-bid auction for the contiguous block between spiteful operators.

Each operator weighs its own profit against its rival's with a common spite
coefficient ``gamma``: ``gamma = 0`` is the self-interested bidder and
``gamma = 1`` the purely malicious one. The loser takes the non-contiguous
block at its reserve price and pays the carrier-aggregation investment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ConfigError


@dataclass(frozen=True)
class AuctionInputs:
    """Aggregate revenues under each allocation plus the auction's cost terms.

    ``r{i}_A`` is operator i's aggregate revenue when it holds the contiguous
    block, ``r{i}_B`` when it holds the other one.
    """

    r1_A: float
    r2_A: float
    r1_B: float
    r2_B: float
    c_A: float = 0.1
    c_B: float = 0.2
    c_BS: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("r1_A", "r2_A", "r1_B", "r2_B", "c_A", "c_B", "c_BS", "gamma"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(f"must be a finite number, got {value!r}", name)
            if value < 0:
                raise ConfigError("must be >= 0", name)
        if self.gamma > 1:
            raise ConfigError("must lie in [0, 1]", "gamma")

    def r_A(self, i: int) -> float:
        return self.r1_A if i == 1 else self.r2_A

    def r_B(self, i: int) -> float:
        return self.r1_B if i == 1 else self.r2_B

    def pi_B(self, i: int) -> float:
        """Profit from the non-contiguous block."""
        return self.r_B(i) - self.c_B - self.c_BS

    def net_gain(self, i: int) -> float:
        """Value of winning over losing, used to break ties."""
        return self.r_A(i) - self.pi_B(i)

    def with_gamma(self, gamma: float) -> "AuctionInputs":
        return AuctionInputs(self.r1_A, self.r2_A, self.r1_B, self.r2_B, self.c_A, self.c_B,
                             self.c_BS, gamma)


class Bids(NamedTuple):
    b1: float
    b2: float
    floored: tuple[bool, bool] = (False, False)


def _raw_bid(inputs: AuctionInputs, i: int) -> float:
    j = 2 if i == 1 else 1
    g = inputs.gamma
    # grouped so that b1 == b2 holds bit-for-bit at gamma = 1/2
    mix = (1.0 - g) * inputs.net_gain(i) + g * inputs.net_gain(j)
    return (mix + (1.0 - g) * inputs.c_A) / (2.0 - g)


def equilibrium_bids(inputs: AuctionInputs) -> Bids:
    """Equilibrium bids, each floored at the reserve ``c_A`` (flagged when applied)."""
    raw = (_raw_bid(inputs, 1), _raw_bid(inputs, 2))
    floored = tuple(b < inputs.c_A for b in raw)
    b1, b2 = (max(b, inputs.c_A) for b in raw)
    return Bids(b1, b2, floored)


def tie_winner(inputs: AuctionInputs) -> int:
    """Operator awarded the block on equal bids: larger net gain, operator 1 on equality."""
    return 2 if inputs.net_gain(2) > inputs.net_gain(1) else 1


def _winner(inputs, b1, b2):
    if b1 > b2:
        return 1, False
    if b2 > b1:
        return 2, False
    return tie_winner(inputs), True


def spiteful_payoff(inputs: AuctionInputs, b1: float, b2: float) -> tuple[float, float]:
    """Spite-weighted objectives ``(Pi1, Pi2)`` at an arbitrary bid pair."""
    g = inputs.gamma
    winner, _ = _winner(inputs, b1, b2)
    bids = {1: b1, 2: b2}
    out = []
    for i in (1, 2):
        j = 2 if i == 1 else 1
        if winner == i:
            out.append((1.0 - g) * (inputs.r_A(i) - bids[i]) - g * inputs.pi_B(j))
        else:
            out.append((1.0 - g) * inputs.pi_B(i) - g * (inputs.r_A(j) - bids[j]))
    return out[0], out[1]


@dataclass(frozen=True)
class AuctionOutcome:
    b1_star: float
    b2_star: float
    winner: int
    realized_profit_1: float
    realized_profit_2: float
    tie: bool
    tie_rule_applied: str
    floored: tuple[bool, bool] = (False, False)


def run_auction(inputs: AuctionInputs) -> AuctionOutcome:
    """Play the equilibrium bids; the winner pays its own bid."""
    b1, b2, floored = equilibrium_bids(inputs)
    winner, tie = _winner(inputs, b1, b2)
    loser = 2 if winner == 1 else 1
    profits = {winner: inputs.r_A(winner) - (b1 if winner == 1 else b2), loser: inputs.pi_B(loser)}
    rule = ""
    if tie:
        rule = f"equal bids; block A to operator {winner} (larger R_A - pi_B, operator 1 on equality)"
    return AuctionOutcome(b1, b2, winner, profits[1], profits[2], tie, rule, floored)

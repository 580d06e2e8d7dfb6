"""Equilibrium pricing, revenues and spectrum auctions for a duopoly in which
one operator can offer double-speed service before its rival.

The finite-horizon phase, the infinite-horizon phase and the auction are
solved in closed form; :mod:`specgame.oracle` checks them independently by
backward induction and necessary-condition residuals.
"""

from .asymmetric import (AsymCoefficients, AsymSolution, PhaseTrajectory, asym_coefficients,
                         costate_offsets, equilibrium_prices, k_at, riccati_roots, solve_asymmetric,
                         z_at)
from .auction import AuctionInputs, AuctionOutcome, equilibrium_bids, run_auction, spiteful_payoff
from .errors import (ConfigError, DegenerateParametersError, OracleError, QuadratureError,
                     SolverError, SpecGameError, ValidityError)
from .market import (ASYMMETRIC, SYMMETRIC, MarketParams, MarketState, PhaseKind, share_rate,
                     switching_masses, validity_interval)
from .oracle import (DiscreteGameSetup, QuadraticValue, ResidualReport, adjudicate,
                     auction_best_response, backward_induction, compare_finite, compare_infinite,
                     residual_report)
from .revenue import (RevenueReport, aggregate_revenues, phase_revenue, revenue_gain, swap_roles)
from .riccati import DEFAULT_MODE, Mode
from .scenario import (ArtifactBundle, ScenarioConfig, ScenarioRunner, UnverifiedError, read_csv,
                       run_scenario, sweep)
from .symmetric import (SymCoefficients, SymSolution, equilibrium_prices_sym, share_trajectory_sym,
                        solve_symmetric, solve_symmetric_coeffs)

__version__ = "0.1.0"

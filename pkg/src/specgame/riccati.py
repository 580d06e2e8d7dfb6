"""Coefficient systems for the affine costate ansatz ``lambda_i = k x1 + e_i``.

Substituting the ansatz into the adjoint equations leaves a scalar Riccati
equation for ``k`` and linear equations for ``e1`` and ``z = e1 - e2``::

    9 s1 dk/dt  = -(q2 k^2 - q1 k + q0)
    de1/dt      = mu(k) e1 + nu(k, z)
    dz/dt       = (1 + rho) z - (2 s2 + zk k) / 3

Three variants are kept side by side:

``feedback``
    Full closed-loop adjoint, where the rival's feedback slope includes the
    dependence of its costate on the state. This is the system the discrete
    backward-induction oracle converges to and the package default.
``matched``
    The rival's feedback slope is taken as the bare ``-/+ s2 / 3``. Yields the
    quadratic ``6k^2 - (11 s_hi + 25 s_lo + 9 rho s1) k + 2 s2^2`` in both phases.
``printed``
    Same as ``matched`` but with the finite-horizon constant term ``2 s1 s2``
    and the ``+6k`` sign in ``mu`` taken literally from the reference formulas. Kept for
    documenting the discrepancy only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ConfigError, DegenerateParametersError
from .market import MarketParams


class Mode(str, Enum):
    FEEDBACK = "feedback"
    MATCHED = "matched"
    PRINTED = "printed"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, Mode):
            return value
        aliases = {
            "asprintedprop1": cls.PRINTED,
            "matchedtoprop2": cls.MATCHED,
        }
        key = str(value).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(
                f"unknown mode {value!r}; expected one of {[m.value for m in cls]}", "quad_mode"
            ) from None


DEFAULT_MODE = Mode.FEEDBACK


@dataclass(frozen=True)
class CoefficientSystem:
    """Numeric coefficients of the ansatz equations for one parameter set.

    All rates are per unit time. ``q2, q1, q0`` define the Riccati polynomial
    in the ``9 s1`` normalisation; ``mu_k``, ``nu_k``, ``z_k`` are the
    multipliers of ``k`` in ``mu``, ``nu`` and the ``z`` forcing.
    """

    params: MarketParams
    mode: Mode
    q2: float
    q1: float
    q0: float
    mu_k: float
    nu_k: float
    z_k: float

    @classmethod
    def build(cls, params: MarketParams, mode=DEFAULT_MODE) -> "CoefficientSystem":
        mode = Mode.parse(mode)
        a, b, rho = params.s_lo, params.s_hi, params.rho
        s1, s2 = params.s1, params.s2
        if mode is Mode.FEEDBACK:
            return cls(params, mode, 8.0, 26 * a + 10 * b + 9 * rho * s1, 2 * s2 * s2, -8.0, 4.0, 1.0)
        q1 = 25 * a + 11 * b + 9 * rho * s1
        if mode is Mode.MATCHED:
            return cls(params, mode, 6.0, q1, 2 * s2 * s2, -6.0, 3.0, 0.0)
        return cls(params, mode, 6.0, q1, 2 * s1 * s2, 6.0, 3.0, 0.0)

    def roots(self) -> tuple[float, float]:
        """Both real roots ``alpha1 < alpha2`` of ``q2 k^2 - q1 k + q0``."""
        disc = self.q1 * self.q1 - 4.0 * self.q2 * self.q0
        if not disc > 0:
            raise DegenerateParametersError(f"Riccati discriminant {disc!r} is not positive")
        root = math.sqrt(disc)
        # q1 > 0 always, so this pairing avoids cancellation in the small root
        alpha2 = (self.q1 + root) / (2.0 * self.q2)
        alpha1 = 2.0 * self.q0 / (self.q1 + root)
        return alpha1, alpha2

    def riccati_residual(self, k):
        return self.q2 * k * k - self.q1 * k + self.q0

    def riccati_rate(self, k):
        """dk/dt."""
        return -self.riccati_residual(k) / (9.0 * self.params.s1)

    def mu(self, k):
        p = self.params
        return (13 * p.s_lo + 5 * p.s_hi + self.mu_k * k) / (9 * p.s1) + p.rho

    def nu(self, k, z, du):
        p = self.params
        return -(2 * p.s2 + self.nu_k * k) * (du + 2 * p.s_lo + p.s_hi - z) / (9 * p.s1)

    def z_forcing(self, k):
        """Constant term of dz/dt, i.e. ``dz/dt = (1 + rho) z - z_forcing(k)``."""
        return (2 * self.params.s2 + self.z_k * k) / 3.0

    @property
    def z_rate(self) -> float:
        return 1.0 + self.params.rho

"""Panel Gauss-Legendre quadrature for scalar linear ODEs.

The finite-horizon coefficients and the market share all solve equations of
the form ``y' = rate(t) y + forcing(t)``. Their integrating-factor solutions
are evaluated here on a uniform panel grid: anchor values at the panel nodes
are propagated once and cached, and an arbitrary ``t`` is reached from the
nearest anchor on the pinned side with one more Gauss rule. Every integral is
taken over at most one panel, so no quantity is ever formed as a difference
of two large cumulative sums.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev
from numpy.polynomial.legendre import leggauss

from .errors import QuadratureError


@lru_cache(maxsize=None)
def gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def integrate_spans(f, lo, hi, order=10):
    """Vectorised ``int_lo^hi f`` with one Gauss rule per (lo, hi) pair.

    ``f`` must accept arrays of any shape. Spans may be reversed or empty.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    x, w = gauss_rule(order)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = mid[..., None] + half[..., None] * x
    return half * (np.asarray(f(pts), dtype=float) @ w)


class LinearFlow:
    """Solution of ``y' = rate(t) y + forcing(t)`` on ``[t0, t1]``.

    Parameters
    ----------
    rate : callable or float
        Vectorised function of time, or a constant rate.
    forcing : callable
        Vectorised function of time.
    t0, t1 : float
        Interval, ``t0 < t1``.
    value : float
        Value of ``y`` at the pinned end.
    pin : {"start", "end"}
        Which end ``value`` is attached to.
    panels : int
        Initial number of panels; doubled until the order-comparison error
        estimate drops below ``rtol``.
    dense_degree : int
        Degree of the per-panel Chebyshev interpolant used for fast
        evaluation; 0 disables it and every call integrates directly.

    Notes
    -----
    Flows are often nested (one flow's rate or forcing calls another), which
    multiplies the number of Gauss nodes per evaluation. The interpolant makes
    each call cost one polynomial evaluation. It is checked against direct
    integration at interior points and dropped if it misses ``rtol``.
    """

    def __init__(self, rate, forcing, t0, t1, value, pin="start", panels=64, order=10,
                 rtol=1e-10, max_refinements=6, dense_degree=24):
        if not t1 > t0:
            raise ValueError("LinearFlow needs t1 > t0")
        if pin not in ("start", "end"):
            raise ValueError("pin must be 'start' or 'end'")
        self.rate = rate
        self.forcing = forcing
        self.t0, self.t1 = float(t0), float(t1)
        self.pin = pin
        self.value = float(value)
        self.order = order
        for _ in range(max_refinements + 1):
            grid = np.linspace(self.t0, self.t1, panels + 1)
            coarse = self._anchors(grid, order)
            fine = self._anchors(grid, order + 6)
            scale = max(1.0, float(np.max(np.abs(fine))))
            self.error_estimate = float(np.max(np.abs(fine - coarse))) / scale
            if self.error_estimate <= rtol:
                break
            panels *= 2
        else:
            raise QuadratureError(
                f"flow did not reach rtol={rtol:g} with {panels} panels",
                achieved=self.error_estimate,
            )
        self.grid = grid
        self.anchors = fine
        self.order = order + 6
        self._cheb = None
        if dense_degree:
            self._build_dense(dense_degree, rtol)

    def _integrate_rate(self, lo, hi, order):
        if callable(self.rate):
            return integrate_spans(self.rate, lo, hi, order)
        return self.rate * (np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float))

    def _step(self, s, t, ys, order):
        """Propagate values ``ys`` known at times ``s`` to times ``t``."""
        x, w = gauss_rule(order)
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        mid = 0.5 * (s + t)
        half = 0.5 * (t - s)
        tau = mid[..., None] + half[..., None] * x
        growth = self._integrate_rate(s, t, order)
        inner = self._integrate_rate(tau, t[..., None], order)
        particular = half * ((np.exp(inner) * self.forcing(tau)) @ w)
        return np.exp(growth) * ys + particular

    def _anchors(self, grid, order):
        n = len(grid) - 1
        if self.pin == "start":
            src, dst = grid[:-1], grid[1:]
        else:
            src, dst = grid[1:], grid[:-1]
        # homogeneous and particular parts of each panel step, then a scalar sweep
        mult = np.exp(self._integrate_rate(src, dst, order))
        part = self._step(src, dst, np.zeros(n), order)
        out = np.empty(n + 1)
        if self.pin == "start":
            out[0] = self.value
            for j in range(n):
                out[j + 1] = mult[j] * out[j] + part[j]
        else:
            out[n] = self.value
            for j in range(n - 1, -1, -1):
                out[j] = mult[j] * out[j + 1] + part[j]
        return out

    def _build_dense(self, degree, rtol):
        # Chebyshev-Lobatto nodes include both panel ends, so anchors are reproduced
        nodes = np.cos(np.pi * np.arange(degree + 1) / degree)[::-1]
        lo, hi = self.grid[:-1], self.grid[1:]
        pts = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * nodes
        vals = self.exact(pts)
        coef = chebyshev.chebfit(nodes, vals.T, degree)
        check = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * np.array([-0.61, 0.17, 0.83])
        self._cheb = coef
        direct = self.exact(check)
        scale = max(1.0, float(np.max(np.abs(self.anchors))))
        if float(np.max(np.abs(self(check) - direct))) > rtol * scale:
            self._cheb = None

    def __call__(self, t):
        if self._cheb is None:
            return self.exact(t)
        t = np.asarray(t, dtype=float)
        flat = np.clip(t.ravel(), self.t0, self.t1)
        n = len(self.grid) - 1
        h = (self.t1 - self.t0) / n
        idx = np.clip(np.floor((flat - self.t0) / h).astype(int), 0, n - 1)
        u = 2.0 * (flat - self.grid[idx]) / h - 1.0
        out = chebyshev.chebval(u, self._cheb[:, idx], tensor=False)
        # node times return the propagated anchors, so pinned values stay exact
        node = np.rint((flat - self.t0) / h).astype(int)
        hit = self.grid[node] == flat
        out[hit] = self.anchors[node[hit]]
        return out.reshape(t.shape) if t.ndim else float(out[0])

    def exact(self, t):
        """Direct evaluation by one Gauss step from the nearest pinned-side anchor."""
        t = np.asarray(t, dtype=float)
        flat = np.clip(t.ravel(), self.t0, self.t1)
        n = len(self.grid) - 1
        h = (self.t1 - self.t0) / n
        if self.pin == "start":
            idx = np.clip(np.floor((flat - self.t0) / h).astype(int), 0, n - 1)
        else:
            idx = np.clip(np.ceil((flat - self.t0) / h).astype(int), 1, n)
        s = self.grid[idx]
        out = self._step(s, flat, self.anchors[idx], self.order)
        return out.reshape(t.shape) if t.ndim else float(out[0])

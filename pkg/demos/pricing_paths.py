"""Equilibrium prices and market shares before and after the rival catches up.

Run: python3 demos/pricing_paths.py
"""

import numpy as np

from specgame import MarketParams, solve_asymmetric, solve_symmetric


def main():
    params = MarketParams(u0=10.0, eta=0.5, rho=0.5, s_lo=5.0, s_hi=10.0)
    for T in (0.5, 1.5):
        _, asym = solve_asymmetric(params, 0.5, T)
        _, sym = solve_symmetric(params, asym.solution.x1_T, T)
        print(f"deployment time T = {T}")
        print(f"{'t':>6} {'p1':>9} {'p2':>9} {'x1':>9}  phase")
        for tr, times in ((asym, np.linspace(0.0, T, 6)), (sym, T + np.array([0.0, 1.0, 4.0, 8.0]))):
            p1, p2 = tr.solution.prices(times)
            for t, a, b, x in zip(times, p1, p2, tr.solution.x1(times)):
                print(f"{t:6.2f} {a:9.4f} {b:9.4f} {x:9.5f}  {tr.phase.tag}")
        print()


if __name__ == "__main__":
    main()

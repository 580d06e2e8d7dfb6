"""How much the early double-speed service is worth to its holder.

Run: python3 demos/revenue_gain.py
"""

from specgame import MarketParams, aggregate_revenues


def main():
    base = MarketParams(u0=10.0, eta=0.5, rho=0.5, s_lo=5.0, s_hi=10.0)
    print(f"{'T':>5} {'eta':>5} {'x1_0':>5} {'R1^A':>9} {'R2^B':>9} {'gain':>8}")
    for eta in (0.0, 0.25, 0.75):
        for x1_0 in (0.5, 0.6):
            for T in (0.5, 1.0, 1.5, 2.0):
                r = aggregate_revenues(base.replace(eta=eta), x1_0, T)
                r1_A, r2_B = r.r_total_A_to_1
                print(f"{T:5.1f} {eta:5.2f} {x1_0:5.1f} {r1_A:9.4f} {r2_B:9.4f} {r.gain:8.5f}")


if __name__ == "__main__":
    main()

"""Spiteful first-price bidding for the contiguous block.

Bids come from the closed form and are checked against a brute-force best
response to a uniformly bidding rival.

Run: python3 demos/spectrum_auction.py
"""

from specgame import (AuctionInputs, MarketParams, aggregate_revenues, auction_best_response,
                      run_auction)


def main():
    params = MarketParams(u0=10.0, eta=0.5, rho=0.5, s_lo=5.0, s_hi=10.0)
    for T in (0.5, 1.5):
        rev = aggregate_revenues(params, 0.6, T).auction_revenues()
        print(f"T = {T}: " + ", ".join(f"{k} {v:.4f}" for k, v in rev.items()))
        print(f"{'gamma':>6} {'b1':>9} {'b2':>9} {'grid b1':>9} {'winner':>6} {'profit1':>9} {'profit2':>9}")
        for gamma in (0.0, 0.25, 0.5, 0.75, 1.0):
            inputs = AuctionInputs(**rev, c_A=0.1, c_B=0.2, c_BS=1.0, gamma=gamma)
            out = run_auction(inputs)
            grid_b1, _, _ = auction_best_response(inputs, 1)
            print(f"{gamma:6.2f} {out.b1_star:9.4f} {out.b2_star:9.4f} {grid_b1:9.4f} {out.winner:6d} "
                  f"{out.realized_profit_1:9.4f} {out.realized_profit_2:9.4f}")
        print()


if __name__ == "__main__":
    main()

"""Compare the three coefficient systems with the backward-induction oracle.

Prints the numbers recorded in docs/ERRATA.md. Takes a few seconds.

Run: python3 demos/oracle_adjudication.py
"""

from specgame import MarketParams, adjudicate, compare_finite, compare_infinite


def main():
    params = MarketParams(u0=10.0, eta=0.5, rho=0.5, s_lo=5.0, s_hi=10.0)
    dt = 1e-4
    print(f"{'T':>5} {'mode':>9} {'k err':>10} {'e err':>10} {'price err':>10} {'x1 err':>10}")
    for T in (0.5, 1.5):
        for mode in ("feedback", "matched", "printed"):
            c = compare_finite(params, 0.5, T, mode, dt)
            print(f"{T:5.1f} {mode:>9} {c.k_err:10.3e} {c.e_err:10.3e} {c.price_err:10.3e} "
                  f"{c.share_err:10.3e}  {c.status}")
    for mode in ("feedback", "matched"):
        c = compare_infinite(params, mode, dt)
        print(f"{'inf':>5} {mode:>9} {c.k_err:10.3e} {c.e_err:10.3e} {c.price_err:10.3e} "
              f"{c.share_err:10.3e}  {c.status}")
    print()
    for T in (0.5, 1.5):
        a = adjudicate(params, T, dt)
        print(f"T = {T}: oracle error {a.oracle_error:.3e}")
        for mode, dev in a.deviation.items():
            print(f"  {mode:>9}: deviation {dev:.3e}  ({a.ratio(mode):.3g}x oracle error)")


if __name__ == "__main__":
    main()

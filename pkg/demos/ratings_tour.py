"""Team strength three ways: margin least squares, win-total preseason fit,
and the PageRank network ranking, plus the early-season blend between them.

    python3 demos/ratings_tour.py
"""

from winprob import (
    WinTotalLine,
    blend_ratings,
    build_league_network,
    expected_wins,
    fit_preseason_ratings,
    fit_season_ratings,
    gamma_blend,
    gen_schedule,
    pagerank_ratings,
)

R_TRUE = {
    "BUF": 6.0,
    "KC": 5.0,
    "PHI": 2.5,
    "DET": 1.0,
    "NYJ": -4.0,
    "CAR": -10.5,
}
H_TRUE = 2.3


def main():
    # --- season fit on noisy margins -------------------------------------
    matchups = gen_schedule(H_TRUE, R_TRUE, noise_sd=10.0, seed=3, rounds=2)
    fit = fit_season_ratings(matchups)
    print(f"{len(matchups)} games, home edge fit {fit.home_edge:+.2f} (true {H_TRUE:+.2f})")
    print()
    print("team   true    fit     err")
    for t in sorted(R_TRUE, key=R_TRUE.get, reverse=True):
        r = fit.ratings[t]
        print(f"{t:<5} {R_TRUE[t]:+6.2f} {r:+7.2f} {r - R_TRUE[t]:+7.2f}")
    print(f"sum of fit ratings: {sum(fit.ratings.values()):+.2e} (constrained to zero)")

    # --- preseason fit from win totals ------------------------------------
    # Book win totals for the same schedule, computed from the true ratings
    # so the fit has something exact to chase.
    pairs = [(m.home, m.away) for m in matchups]
    lines = [
        WinTotalLine(t, expected_wins(t, pairs, H_TRUE, R_TRUE)) for t in sorted(R_TRUE)
    ]
    pre = fit_preseason_ratings(lines, pairs, seed=0)
    print()
    print(f"preseason fit: objective {pre.objective:.2e} after {pre.iterations} iterations")
    print("team   line    E[W] at fit")
    for line in lines:
        ew = expected_wins(line.team, pairs, pre.home_edge, pre.ratings)
        print(f"{line.team:<5} {line.lam:6.2f} {ew:10.2f}")
    # Win totals pin down expected wins, not the ratings themselves: several
    # rating vectors produce the same E[W] profile, so only the E[W] match
    # above is guaranteed.

    # --- blending ----------------------------------------------------------
    print()
    print("week  gamma   blended BUF (pre {:+.2f}, season {:+.2f})".format(
        pre.ratings["BUF"], fit.ratings["BUF"]))
    for week in (1, 3, 6, 9, 11, 14):
        g = gamma_blend(week)
        b = blend_ratings(pre.ratings["BUF"], fit.ratings["BUF"], week)
        print(f"{week:>4}  {g:5.2f}  {b:+8.2f}")

    # --- network view ------------------------------------------------------
    net = build_league_network(matchups)
    scores = pagerank_ratings(net)
    print()
    print("pagerank (margin-weighted loser->winner edges):")
    for t, s in sorted(scores.items(), key=lambda kv: -kv[1]):
        print(f"  {t:<5} {s:.4f}")
    order_ls = sorted(fit.ratings, key=fit.ratings.get, reverse=True)
    order_pr = sorted(scores, key=scores.get, reverse=True)
    agree = sum(a == b for a, b in zip(order_ls, order_pr))
    print(f"rank agreement with least squares: {agree}/{len(order_ls)} positions")


if __name__ == "__main__":
    main()

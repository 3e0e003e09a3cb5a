"""Walk the full pipeline on a synthetic league: generate a play log,
train the logistic model, and read the evaluation the way you would for a
real season.

Run from the repository root:

    python3 demos/synthetic_season.py
"""

import numpy as np

from winprob import (
    RatingBook,
    TrainConfig,
    build_dataset,
    evaluate_predictions,
    featurize_matrix,
    fit_standardizer,
    gen_play_records,
    predict_states,
    split_dataset,
    standardize_matrix,
    time_bucketed_eval,
    train_glm,
)

SEED = 11


def main():
    # A 300-game league. gen_play_records hands back the per-game pregame
    # rating differentials it used, which is exactly what a RatingBook wants.
    plays, diffs = gen_play_records(n_games=300, seed=SEED, plays_per_game=80)
    print(f"generated {len(plays)} plays across {len(diffs)} games")

    ds = build_dataset(plays, RatingBook(game_diffs=diffs), source="synthetic")
    train, test = split_dataset(ds, 0.7, seed=SEED)
    print(f"split: {train.provenance.games} train games, {test.provenance.games} test games")

    x = featurize_matrix(train.states())
    stats = fit_standardizer(x)
    model = train_glm(standardize_matrix(x, stats), train.labels(), TrainConfig(seed=SEED), stats)
    print(f"IRLS converged in {model.meta.iterations} iterations")

    preds = predict_states(model, test.states())
    report = evaluate_predictions(preds, test.labels())
    print()
    print(f"held-out plays      {report.n}")
    print(f"accuracy            {report.accuracy:.4f}")
    print(f"brier               {report.brier:.4f}")
    print(f"brier, climatology  {report.brier_climatology:.4f}")
    if report.reliability is not None:
        line = report.reliability
        print(f"reliability line    slope {line.slope:.3f}  intercept {line.intercept:+.3f}  R^2 {line.r_squared:.3f}")

    # Early-game states carry almost no signal beyond the pregame ratings;
    # late-game states are nearly decided. The Brier trace should fall.
    print()
    print("bucket  window        n      brier")
    for b in time_bucketed_eval(model, test, bucket_s=600):
        flag = "  (low sample)" if b.low_sample else ""
        print(f"{b.bucket:>6}  {b.t_lo:>4}-{b.t_hi:<4}  {b.report.n:>6}  {b.report.brier:.4f}{flag}")

    briers = [b.report.brier for b in time_bucketed_eval(model, test, bucket_s=600)]
    assert briers[-1] < briers[0], "late-game error should undercut early-game error"
    print()
    print(f"early->late brier drop: {briers[0]:.4f} -> {briers[-1]:.4f}")

    # One concrete read: a 3-point home lead at halftime with the ball.
    sample = [s for s in test.states() if 1700 <= s.time_elapsed_s <= 1900][:5]
    if sample:
        print()
        print("halftime-ish states:")
        for s, p in zip(sample, predict_states(model, sample)):
            print(f"  diff {s.score_diff:+3d}, poss {s.possession.value}, p_home {p:.3f}")


if __name__ == "__main__":
    np.set_printoptions(precision=4, suppress=True)
    main()

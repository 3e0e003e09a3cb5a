"""Command-line driver.

Subcommands: train, eval, ratings (fit-season, fit-preseason, blend,
pagerank), timeline, serve, selftest. Every command is deterministic given
its flags and seed; outputs are JSON on stdout (or CSV where documented)
and structured error JSON on stderr.

Exit codes: 0 success, 1 internal failure (e.g. non-convergence), 2 bad
usage or unreadable/invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Dict, List, Optional

import numpy as np

from . import evaluation, ratings as ratings_mod, synth
from .core import canonical_json, state_from_play
from .errors import (
    ConstantColumnError,
    ConvergenceError,
    CsvFormatError,
    ModelFormatError,
    RatingLookupError,
    SchemaError,
    SingularScheduleError,
    ValidationError,
    WinprobError,
)
from .features import featurize_matrix, fit_standardizer, standardize_matrix
from .ingest import load_dataset, parse_play_log, split_dataset
from .models import (
    TrainConfig,
    fnn_gradients,
    fnn_loss,
    load_model,
    predict_states,
    save_model,
    train_fnn,
    train_glm,
    train_nb,
)

_USAGE_ERRORS = (
    ValidationError,
    ConstantColumnError,
    CsvFormatError,
    SchemaError,
    ModelFormatError,
    RatingLookupError,
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
)

_TRAIN_CONFIG_KEYS = (
    "max_iter",
    "tol",
    "grad_tol",
    "ridge",
    "learning_rate",
    "momentum",
    "epochs",
    "batch_size",
    "hidden_activation",
)


def _load_config(path: Optional[str]) -> Dict:
    if path is None:
        return {}
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise SchemaError(f"config file {path} must hold a JSON object")
    return cfg


def _merged(args: argparse.Namespace, config: Dict, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _emit(doc: Dict) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")


def _rating_book(args, config) -> ratings_mod.RatingBook:
    ratings_path = _merged(args, config, "ratings")
    games_path = _merged(args, config, "games")
    if ratings_path is None:
        raise ValidationError("--ratings is required (team table or game_id,rating_diff file)")
    return ratings_mod.rating_book_from_files(ratings_path=ratings_path, games_path=games_path)


def _train_config(args, config, seed: int) -> TrainConfig:
    kwargs = {k: config[k] for k in _TRAIN_CONFIG_KEYS if k in config}
    return TrainConfig(seed=seed, **kwargs)


def cmd_train(args, config) -> int:
    seed = _merged(args, config, "seed")
    if seed is None:
        raise ValidationError("--seed is required for training")
    seed = int(seed)
    out = _merged(args, config, "out")
    if out is None:
        raise ValidationError("--out is required")
    model_type = _merged(args, config, "model", "glm")
    if model_type not in ("glm", "nb", "fnn"):
        raise ValidationError(f"--model must be glm, nb or fnn, got {model_type!r}")
    split = float(_merged(args, config, "split", 0.7))
    data = _merged(args, config, "data")
    if data is None:
        raise ValidationError("--data is required")

    ds = load_dataset(data, _rating_book(args, config))
    train, test = split_dataset(ds, split, seed)
    x = featurize_matrix(train.states())
    stats = fit_standardizer(x)
    xs = standardize_matrix(x, stats)
    y = train.labels()
    cfg = _train_config(args, config, seed)
    if model_type == "glm":
        model = train_glm(xs, y, cfg, stats)
    elif model_type == "nb":
        model = train_nb(xs, y, stats)
    else:
        model = train_fnn(xs, y, cfg, stats)
    save_model(model, out)
    _emit(
        {
            "model_type": model_type,
            "out": str(out),
            "train_games": train.provenance.games,
            "train_plays": train.provenance.plays,
            "test_games": test.provenance.games,
            "iterations": model.meta.iterations,
            "final_objective": model.meta.final_objective,
            "seed": seed,
        }
    )
    return 0


def cmd_eval(args, config) -> int:
    model_path = _merged(args, config, "model")
    data = _merged(args, config, "data")
    if model_path is None or data is None:
        raise ValidationError("--model and --data are required")
    model = load_model(model_path)
    ds = load_dataset(data, _rating_book(args, config))
    split = _merged(args, config, "split")
    if split is not None:
        seed = _merged(args, config, "seed")
        if seed is None:
            raise ValidationError("--split needs --seed to reproduce the held-out games")
        _, ds = split_dataset(ds, float(split), int(seed))
    preds = predict_states(model, ds.states())
    labels = ds.labels()
    report = evaluation.evaluate_predictions(preds, labels)
    curve = evaluation.reliability_curve(preds, labels)
    doc = {"report": report.to_dict(), "curve": curve.to_dict(), "model_type": model.model_type}
    buckets = _merged(args, config, "buckets")
    if buckets is not None:
        doc["buckets"] = [tb.to_dict() for tb in evaluation.time_bucketed_eval(model, ds, int(buckets))]
    out = _merged(args, config, "out")
    if out is not None:
        with open(out, "w") as fh:
            fh.write(canonical_json(doc))
    fmt = _merged(args, config, "format", "json")
    if fmt == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(["bin_lo", "bin_hi", "mean_pred", "emp_freq", "count"])
        for b in curve.bins:
            writer.writerow([b.lo, b.hi, b.mean_pred, b.emp_freq, b.count])
    else:
        _emit(doc)
    return 0


def _write_rating_table(path, table, home_edge) -> None:
    ratings_mod.write_ratings_csv(path, table, home_edge)


def cmd_ratings_fit_season(args, config) -> int:
    matchups = ratings_mod.load_matchups_csv(args.matchups)
    week = int(_merged(args, config, "week", 11))
    fit = ratings_mod.fit_season_ratings(matchups)
    table = [
        ratings_mod.TeamRating(
            team_id=t,
            preseason=0.0,
            season=r,
            blended=ratings_mod.blend_ratings(0.0, r, week),
            week=week,
        )
        for t, r in sorted(fit.ratings.items())
    ]
    out = _merged(args, config, "out")
    if out is None:
        raise ValidationError("--out is required")
    _write_rating_table(out, table, fit.home_edge)
    _emit(
        {
            "home_edge": fit.home_edge,
            "rss": fit.rss,
            "ridge_used": fit.ridge_used,
            "teams": len(table),
            "out": str(out),
        }
    )
    return 0


def cmd_ratings_fit_preseason(args, config) -> int:
    lines = ratings_mod.load_win_totals_csv(args.win_totals)
    matchups = ratings_mod.load_matchups_csv(args.matchups)
    schedule = [(m.home, m.away) for m in matchups]
    seed = int(_merged(args, config, "seed", 0))
    week = int(_merged(args, config, "week", 1))
    fit = ratings_mod.fit_preseason_ratings(lines, schedule, seed=seed)
    table = [
        ratings_mod.TeamRating(
            team_id=t,
            preseason=r,
            season=0.0,
            blended=ratings_mod.blend_ratings(r, 0.0, week),
            week=week,
        )
        for t, r in sorted(fit.ratings.items())
    ]
    out = _merged(args, config, "out")
    if out is None:
        raise ValidationError("--out is required")
    _write_rating_table(out, table, fit.home_edge)
    _emit(
        {
            "home_edge": fit.home_edge,
            "objective": fit.objective,
            "grad_norm": fit.grad_norm,
            "iterations": fit.iterations,
            "out": str(out),
        }
    )
    return 0


def cmd_ratings_blend(args, config) -> int:
    pre_table, pre_edge = ratings_mod.load_ratings_csv(args.preseason)
    season_table, season_edge = ratings_mod.load_ratings_csv(args.season)
    week = _merged(args, config, "week")
    if week is None:
        raise ValidationError("--week is required for blending")
    week = int(week)
    pre = {row.team_id: row.preseason for row in pre_table}
    season = {row.team_id: row.season for row in season_table}
    table = ratings_mod.blend_table(pre, season, week)
    out = _merged(args, config, "out")
    if out is None:
        raise ValidationError("--out is required")
    _write_rating_table(out, table, season_edge if season_edge else pre_edge)
    _emit({"week": week, "gamma": ratings_mod.gamma_blend(week), "teams": len(table), "out": str(out)})
    return 0


def cmd_ratings_pagerank(args, config) -> int:
    matchups = ratings_mod.load_matchups_csv(args.matchups)
    alpha = float(_merged(args, config, "alpha", 0.85))
    net = ratings_mod.build_league_network(matchups)
    scores = ratings_mod.pagerank_ratings(net, alpha=alpha)
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    out = _merged(args, config, "out")
    if out is not None:
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["team", "score"])
            for team, score in ranked:
                writer.writerow([team, repr(score)])
    _emit({"alpha": alpha, "ranking": [{"team": t, "score": s} for t, s in ranked]})
    return 0


def cmd_timeline(args, config) -> int:
    model_path = _merged(args, config, "model")
    data = _merged(args, config, "data")
    if model_path is None or data is None:
        raise ValidationError("--model and --data are required")
    game_id = args.game_id
    model = load_model(model_path)
    book = _rating_book(args, config)
    plays, _ = parse_play_log(data)
    rows = [p for p in plays if p.game_id == game_id]
    if not rows:
        raise ValidationError(f"unknown game_id {game_id!r} in {data}")
    states = [state_from_play(p, book) for p in rows]
    order = np.argsort([s.time_elapsed_s for s in states], kind="stable")
    states = [states[i] for i in order]
    preds = predict_states(model, states)
    series = [[int(s.time_elapsed_s), float(p)] for s, p in zip(states, preds)]
    low = int(np.argmin(preds))
    doc = {
        "game_id": game_id,
        "model_type": model.model_type,
        "rows": series,
        "min_p_home": float(preds[low]),
        "min_time_elapsed_s": int(states[low].time_elapsed_s),
    }
    fmt = _merged(args, config, "format", "json")
    out = _merged(args, config, "out")
    if out is not None:
        with open(out, "w") as fh:
            fh.write(canonical_json(doc))
    if fmt == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(["time_elapsed_s", "p_home"])
        for t, p in series:
            writer.writerow([t, p])
    else:
        _emit(doc)
    return 0


def cmd_serve(args, config) -> int:
    from .service import serve

    model_path = _merged(args, config, "model")
    if model_path is None:
        raise ValidationError("--model is required")
    port = int(_merged(args, config, "port", 8080))
    host = _merged(args, config, "host", "127.0.0.1")
    serve(model_path, host=host, port=port)
    return 0


# ---------------------------------------------------------------------------
# selftest: run the oracle suite end to end, no external data needed.


def _selftest_checks() -> List[Dict]:
    checks: List[Dict] = []

    def run(name, fn):
        try:
            detail = fn()
            checks.append({"name": name, "ok": True, "detail": detail})
        except Exception as exc:
            checks.append({"name": name, "ok": False, "detail": f"{type(exc).__name__}: {exc}"})

    def glm_recovery():
        w = np.zeros(21)
        w[1] = 0.09
        w[0] = 0.3
        w[6] = 0.05
        b = 0.1
        ds = synth.gen_glm_dataset(w, b, 30_000, seed=7)
        x = featurize_matrix(ds.states())
        stats = fit_standardizer(x)
        model = train_glm(standardize_matrix(x, stats), ds.labels(), TrainConfig(seed=7), stats)
        w_true = w * stats.sd
        b_true = b + float(np.sum(w * stats.mean))
        gap = max(abs(model.intercept - b_true), float(np.max(np.abs(model.weights - w_true))))
        assert gap < 0.1, f"recovery gap {gap:.4f}"
        return f"standardized-coefficient gap {gap:.4f}"

    def season_fixture():
        ms = [
            ratings_mod.Matchup("A", "B", 10.0, 2024, 1),
            ratings_mod.Matchup("B", "A", -4.0, 2024, 2),
        ]
        fit = ratings_mod.fit_season_ratings(ms)
        assert abs(fit.home_edge - 3.0) < 1e-9 and abs(fit.ratings["A"] - 3.5) < 1e-9
        return f"h={fit.home_edge:.10f} R_A={fit.ratings['A']:.10f}"

    def preseason_fit():
        truth = {"A": 2.0, "B": -1.0, "C": 0.5, "D": -1.5}
        sched = [(h, a) for h in truth for a in truth if h != a]
        lam = {t: ratings_mod.expected_wins(t, sched, 2.0, truth) for t in truth}
        lines = [ratings_mod.WinTotalLine(t, v) for t, v in lam.items()]
        fit = ratings_mod.fit_preseason_ratings(lines, sched, seed=3)
        gap = max(
            abs(ratings_mod.expected_wins(t, sched, fit.home_edge, fit.ratings) - lam[t]) for t in truth
        )
        assert gap < 1e-6, f"expected-wins gap {gap:.2e}"
        return f"expected-wins gap {gap:.2e}"

    def pagerank_agreement():
        rng = np.random.default_rng(11)
        teams = [f"T{i}" for i in range(8)]
        ms = []
        for w in range(4):
            for i in range(8):
                j = int(rng.integers(0, 8))
                if j == i:
                    continue
                ms.append(ratings_mod.Matchup(teams[i], teams[j], float(rng.integers(1, 21)), 2024, w + 1))
        net = ratings_mod.build_league_network(ms)
        exact = ratings_mod.pagerank_ratings(net)
        power = ratings_mod.pagerank_power_iteration(net)
        gap = max(abs(exact[t] - power[t]) for t in exact)
        assert gap < 1e-8, f"solver gap {gap:.2e}"
        return f"LU vs power iteration gap {gap:.2e}"

    def brier_identities():
        labels = np.array([1] * 57 + [0] * 43)
        direct = evaluation.brier(np.full(100, 0.57), labels)
        assert abs(direct - 0.2451) < 1e-12
        assert abs(evaluation.climatology_brier(labels) - 0.2451) < 1e-12
        return "constant-forecast identity holds at q=0.57"

    def reliability_slope():
        preds, labels = synth.gen_calibrated_preds(50_000, seed=5)
        line = evaluation.fit_reliability_line(evaluation.reliability_curve(preds, labels))
        assert 0.95 < line.slope < 1.05, f"slope {line.slope:.4f}"
        return f"slope {line.slope:.4f}, intercept {line.intercept:.4f}"

    def fnn_gradient_check():
        from .core import StandardizationStats, TrainingMeta
        from .models import FnnModel

        rng = np.random.default_rng(2)
        params = {
            "w1": rng.uniform(-0.5, 0.5, (21, 6)),
            "b1": rng.uniform(-0.5, 0.5, 6),
            "w2": rng.uniform(-0.5, 0.5, (6, 3)),
            "b2": rng.uniform(-0.5, 0.5, 3),
            "w3": rng.uniform(-0.5, 0.5, (3, 1)),
            "b3": rng.uniform(-0.5, 0.5, 1),
        }
        stats = StandardizationStats(mean=np.zeros(21), sd=np.ones(21))
        meta = TrainingMeta(seed=2, iterations=0, final_objective=0.0)
        m = FnnModel(hidden_activation="sigmoid", stats=stats, meta=meta, **params)
        xs = rng.normal(size=(8, 21))
        y = rng.integers(0, 2, 8).astype(float)
        grads = fnn_gradients(m, xs, y)
        worst = 0.0
        h = 1e-5
        for name in ("w1", "b1", "w2", "b2", "w3", "b3"):
            arr = params[name]
            it = np.nditer(arr, flags=["multi_index"])
            while not it.finished:
                idx = it.multi_index
                for sign in (1, -1):
                    shifted = {k: v.copy() for k, v in params.items()}
                    shifted[name][idx] += sign * h
                    mm = FnnModel(hidden_activation="sigmoid", stats=stats, meta=meta, **shifted)
                    if sign == 1:
                        up = fnn_loss(mm, xs, y)
                    else:
                        down = fnn_loss(mm, xs, y)
                numeric = (up - down) / (2 * h)
                analytic = float(np.asarray(grads[name])[idx])
                rel = abs(analytic - numeric) / max(1e-8, abs(analytic), abs(numeric))
                worst = max(worst, rel)
                it.iternext()
        assert worst < 1e-5, f"worst relative error {worst:.2e}"
        return f"worst relative gradient error {worst:.2e}"

    def pipeline_roundtrip():
        import tempfile
        from pathlib import Path

        from .ingest import write_play_log
        from .models import load_model as _load

        plays, diffs = synth.gen_play_records(8, seed=13, plays_per_game=60)
        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            write_play_log(plays, tmp / "plays.csv")
            book = ratings_mod.RatingBook(game_diffs=diffs)
            ds = load_dataset(tmp / "plays.csv", book)
            assert len(ds) == len(plays), "row count mismatch"
            train, test = split_dataset(ds, 0.7, seed=1)
            x = featurize_matrix(train.states())
            stats = fit_standardizer(x)
            model = train_glm(standardize_matrix(x, stats), train.labels(), TrainConfig(seed=1), stats)
            save_model(model, tmp / "m.json")
            again = _load(tmp / "m.json")
            states = test.states()[:50]
            assert np.array_equal(predict_states(model, states), predict_states(again, states))
        return "CSV -> dataset -> train -> save/load round-trip intact"

    run("glm_recovery", glm_recovery)
    run("season_ratings_fixture", season_fixture)
    run("preseason_expected_wins", preseason_fit)
    run("pagerank_solver_agreement", pagerank_agreement)
    run("brier_identities", brier_identities)
    run("reliability_slope", reliability_slope)
    run("fnn_gradient_check", fnn_gradient_check)
    run("pipeline_roundtrip", pipeline_roundtrip)
    return checks


def cmd_selftest(args, config) -> int:
    checks = _selftest_checks()
    failed = [c for c in checks if not c["ok"]]
    _emit({"checks": checks, "passed": len(checks) - len(failed), "failed": len(failed)})
    return 1 if failed else 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="winprob", description="In-game win probability toolkit")
    parser.add_argument("--config", help="JSON file with default flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *names):
        if "data" in names:
            p.add_argument("--data", help="plays CSV path")
        if "ratings" in names:
            p.add_argument("--ratings", help="ratings CSV (team table or game_id,rating_diff)")
            p.add_argument("--games", help="game registry CSV (game_id,season,week,home,away)")
        if "model_path" in names:
            p.add_argument("--model", help="model JSON path")
        if "out" in names:
            p.add_argument("--out", help="output path")
        if "seed" in names:
            p.add_argument("--seed", type=int, help="RNG seed")
        if "split" in names:
            p.add_argument("--split", type=float, help="train fraction (default 0.7)")
        if "format" in names:
            p.add_argument("--format", choices=("json", "csv"), help="output format (default json)")

    p = sub.add_parser("train", help="train a model on the train split of a play log")
    add_common(p, "data", "ratings", "out", "seed", "split")
    p.add_argument("--model", help="model type: glm, nb or fnn (default glm)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a saved model on labeled plays")
    add_common(p, "data", "ratings", "model_path", "out", "seed", "split", "format")
    p.add_argument("--buckets", type=int, help="bucket size in seconds for time-sliced reports")
    p.set_defaults(func=cmd_eval)

    pr = sub.add_parser("ratings", help="team strength tooling")
    rsub = pr.add_subparsers(dest="ratings_command", required=True)

    p = rsub.add_parser("fit-season", help="least-squares ratings from game margins")
    p.add_argument("--matchups", required=True, help="matchups CSV (season,week,home,away,home_margin)")
    p.add_argument("--week", type=int, help="week stamped on the output rows (default 11)")
    p.add_argument("--out", help="ratings CSV output")
    p.set_defaults(func=cmd_ratings_fit_season)

    p = rsub.add_parser("fit-preseason", help="ratings from win-total lines")
    p.add_argument("--win-totals", required=True, dest="win_totals", help="CSV (team,lambda)")
    p.add_argument("--matchups", required=True, help="schedule source CSV")
    p.add_argument("--week", type=int, help="week stamped on the output rows (default 1)")
    p.add_argument("--out", help="ratings CSV output")
    p.add_argument("--seed", type=int, help="multi-start seed (default 0)")
    p.set_defaults(func=cmd_ratings_fit_preseason)

    p = rsub.add_parser("blend", help="combine preseason and season tables")
    p.add_argument("--preseason", required=True, help="ratings CSV carrying the rho column")
    p.add_argument("--season", required=True, help="ratings CSV carrying the season_r column")
    p.add_argument("--week", type=int, help="week of the blend")
    p.add_argument("--out", help="ratings CSV output")
    p.set_defaults(func=cmd_ratings_blend)

    p = rsub.add_parser("pagerank", help="network ranking from game margins")
    p.add_argument("--matchups", required=True)
    p.add_argument("--alpha", type=float, help="damping factor (default 0.85)")
    p.add_argument("--out", help="CSV output (team,score)")
    p.set_defaults(func=cmd_ratings_pagerank)

    p = sub.add_parser("timeline", help="per-play win probability for one game")
    add_common(p, "data", "ratings", "model_path", "out", "format")
    p.add_argument("--game-id", required=True, dest="game_id")
    p.set_defaults(func=cmd_timeline)

    p = sub.add_parser("serve", help="HTTP prediction service")
    add_common(p, "model_path")
    p.add_argument("--port", type=int, help="listen port (default 8080)")
    p.add_argument("--host", help="bind address (default 127.0.0.1)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("selftest", help="run the synthetic oracle suite")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except _USAGE_ERRORS as exc:
        sys.stderr.write(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}) + "\n")
        return 2
    except (ConvergenceError, SingularScheduleError, WinprobError) as exc:
        sys.stderr.write(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())

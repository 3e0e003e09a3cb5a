"""End-to-end runs of the command-line driver, in-process via main(argv)."""

import csv
import io
import json

import numpy as np
import pytest

from winprob import (
    RatingBook,
    build_dataset,
    expected_wins,
    gen_play_records,
    load_model,
    load_ratings_csv,
    predict_states,
    split_dataset,
    write_play_log,
)
from winprob.cli import main
from winprob.evaluation import evaluate_predictions
from winprob.ratings import GAME_RATINGS_CSV_HEADER, MATCHUPS_CSV_HEADER, WIN_TOTALS_CSV_HEADER


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    plays, diffs = gen_play_records(n_games=40, seed=17, plays_per_game=60)
    write_play_log(plays, root / "plays.csv")
    _write_csv(
        root / "game_ratings.csv",
        GAME_RATINGS_CSV_HEADER,
        [[gid, repr(v)] for gid, v in diffs.items()],
    )
    return root


@pytest.fixture(scope="module")
def model_path(workdir):
    path = workdir / "model.json"
    code = main(
        [
            "train",
            "--data", str(workdir / "plays.csv"),
            "--ratings", str(workdir / "game_ratings.csv"),
            "--out", str(path),
            "--seed", "11",
        ]
    )
    assert code == 0
    return path


class TestTrain:
    def test_reports_and_writes_a_loadable_model(self, capsys, workdir):
        out = workdir / "t1.json"
        code, stdout, stderr = _run(
            capsys,
            "train",
            "--data", str(workdir / "plays.csv"),
            "--ratings", str(workdir / "game_ratings.csv"),
            "--out", str(out),
            "--seed", "3",
        )
        assert code == 0 and stderr == ""
        doc = json.loads(stdout)
        assert doc["model_type"] == "glm" and doc["seed"] == 3
        assert doc["train_games"] + doc["test_games"] == 40
        assert doc["train_plays"] == doc["train_games"] * 60
        model = load_model(out)
        assert model.model_type == "glm"

    def test_same_seed_same_bytes(self, capsys, workdir):
        outs = [workdir / "s1.json", workdir / "s2.json", workdir / "s3.json"]
        for out, seed in zip(outs, ("9", "9", "10")):
            code, _, _ = _run(
                capsys,
                "train",
                "--data", str(workdir / "plays.csv"),
                "--ratings", str(workdir / "game_ratings.csv"),
                "--out", str(out),
                "--seed", seed,
            )
            assert code == 0
        assert outs[0].read_bytes() == outs[1].read_bytes()
        assert outs[0].read_bytes() != outs[2].read_bytes()

    @pytest.mark.parametrize("kind", ["nb", "fnn"])
    def test_other_model_types(self, capsys, workdir, kind):
        cfg = workdir / f"{kind}.cfg.json"
        cfg.write_text(json.dumps({"epochs": 20}))
        out = workdir / f"{kind}.json"
        code, stdout, _ = _run(
            capsys,
            "--config", str(cfg),
            "train",
            "--data", str(workdir / "plays.csv"),
            "--ratings", str(workdir / "game_ratings.csv"),
            "--out", str(out),
            "--seed", "4",
            "--model", kind,
        )
        assert code == 0
        assert json.loads(stdout)["model_type"] == kind
        assert load_model(out).model_type == kind

    def test_missing_data_file_is_a_usage_error(self, capsys, workdir):
        code, stdout, stderr = _run(
            capsys,
            "train",
            "--data", str(workdir / "nope.csv"),
            "--ratings", str(workdir / "game_ratings.csv"),
            "--out", str(workdir / "x.json"),
            "--seed", "1",
        )
        assert code == 2 and stdout == ""
        err = json.loads(stderr)["error"]
        assert err["type"] == "FileNotFoundError"
        assert "nope.csv" in err["message"]

    def test_unknown_model_type_rejected(self, capsys, workdir):
        code, _, stderr = _run(
            capsys,
            "train",
            "--data", str(workdir / "plays.csv"),
            "--ratings", str(workdir / "game_ratings.csv"),
            "--out", str(workdir / "x.json"),
            "--seed", "1",
            "--model", "svm",
        )
        assert code == 2
        assert "glm, nb or fnn" in json.loads(stderr)["error"]["message"]

    def test_seed_required(self, capsys, workdir):
        code, _, stderr = _run(
            capsys,
            "train",
            "--data", str(workdir / "plays.csv"),
            "--ratings", str(workdir / "game_ratings.csv"),
            "--out", str(workdir / "x.json"),
        )
        assert code == 2
        assert "seed" in json.loads(stderr)["error"]["message"]


class TestEval:
    def test_full_data_report(self, capsys, workdir, model_path):
        code, stdout, _ = _run(
            capsys,
            "eval",
            "--model", str(model_path),
            "--data", str(workdir / "plays.csv"),
            "--ratings", str(workdir / "game_ratings.csv"),
        )
        assert code == 0
        doc = json.loads(stdout)
        assert doc["model_type"] == "glm"
        assert doc["report"]["n"] == 2400
        assert 0 < doc["report"]["brier"] < 0.25
        assert sum(b["count"] for b in doc["curve"]["bins"]) == 2400

    def test_split_scores_the_held_out_games(self, capsys, workdir, model_path):
        code, stdout, _ = _run(
            capsys,
            "eval",
            "--model", str(model_path),
            "--data", str(workdir / "plays.csv"),
            "--ratings", str(workdir / "game_ratings.csv"),
            "--split", "0.7",
            "--seed", "11",
        )
        assert code == 0
        doc = json.loads(stdout)

        plays, diffs = gen_play_records(n_games=40, seed=17, plays_per_game=60)
        ds = build_dataset(plays, RatingBook(game_diffs=diffs))
        _, test = split_dataset(ds, 0.7, seed=11)
        model = load_model(model_path)
        want = evaluate_predictions(predict_states(model, test.states()), test.labels())
        assert doc["report"]["n"] == len(test)
        assert doc["report"]["brier"] == pytest.approx(want.brier, abs=1e-12)
        assert doc["report"]["accuracy"] == pytest.approx(want.accuracy, abs=1e-12)

    def test_split_requires_seed(self, capsys, workdir, model_path):
        code, _, stderr = _run(
            capsys,
            "eval",
            "--model", str(model_path),
            "--data", str(workdir / "plays.csv"),
            "--ratings", str(workdir / "game_ratings.csv"),
            "--split", "0.7",
        )
        assert code == 2
        assert "seed" in json.loads(stderr)["error"]["message"]

    def test_time_buckets_cover_regulation(self, capsys, workdir, model_path):
        code, stdout, _ = _run(
            capsys,
            "eval",
            "--model", str(model_path),
            "--data", str(workdir / "plays.csv"),
            "--ratings", str(workdir / "game_ratings.csv"),
            "--buckets", "300",
        )
        assert code == 0
        buckets = json.loads(stdout)["buckets"]
        assert len(buckets) == 12
        assert [b["bucket"] for b in buckets] == list(range(12))
        assert buckets[0]["t_lo"] == 0 and buckets[-1]["t_hi"] == 3600

    def test_csv_format(self, capsys, workdir, model_path):
        code, stdout, _ = _run(
            capsys,
            "eval",
            "--model", str(model_path),
            "--data", str(workdir / "plays.csv"),
            "--ratings", str(workdir / "game_ratings.csv"),
            "--format", "csv",
        )
        assert code == 0
        rows = list(csv.reader(io.StringIO(stdout)))
        assert rows[0] == ["bin_lo", "bin_hi", "mean_pred", "emp_freq", "count"]
        assert len(rows) > 3
        for r in rows[1:]:
            lo, hi = float(r[0]), float(r[1])
            assert 0.0 <= lo < hi <= 1.0
            assert lo <= float(r[2]) <= hi
            assert int(r[4]) > 0

    def test_out_file_holds_the_same_document(self, capsys, workdir, model_path):
        out = workdir / "report.json"
        code, stdout, _ = _run(
            capsys,
            "eval",
            "--model", str(model_path),
            "--data", str(workdir / "plays.csv"),
            "--ratings", str(workdir / "game_ratings.csv"),
            "--out", str(out),
        )
        assert code == 0
        assert json.loads(out.read_text()) == json.loads(stdout)
        assert out.read_text().endswith("\n")

    def test_missing_model_file(self, capsys, workdir):
        code, _, stderr = _run(
            capsys,
            "eval",
            "--model", str(workdir / "ghost.json"),
            "--data", str(workdir / "plays.csv"),
            "--ratings", str(workdir / "game_ratings.csv"),
        )
        assert code == 2
        assert json.loads(stderr)["error"]["type"] in ("FileNotFoundError", "ModelFormatError")


class TestFitSeason:
    def test_two_game_fixture(self, capsys, tmp_path):
        _write_csv(
            tmp_path / "m.csv",
            MATCHUPS_CSV_HEADER,
            [[2024, 1, "A", "B", 10.0], [2024, 2, "B", "A", -4.0]],
        )
        out = tmp_path / "r.csv"
        code, stdout, _ = _run(
            capsys, "ratings", "fit-season", "--matchups", str(tmp_path / "m.csv"), "--out", str(out)
        )
        assert code == 0
        doc = json.loads(stdout)
        assert doc["home_edge"] == pytest.approx(3.0, abs=1e-9)
        assert doc["rss"] == pytest.approx(0.0, abs=1e-18)
        assert doc["ridge_used"] == 0.0
        table, home_edge = load_ratings_csv(out)
        assert home_edge == pytest.approx(3.0, abs=1e-9)
        by_team = {r.team_id: r for r in table}
        assert by_team["A"].season == pytest.approx(3.5, abs=1e-9)
        assert by_team["B"].season == pytest.approx(-3.5, abs=1e-9)
        # default stamp is week 11: fully faded to the season fit
        assert by_team["A"].week == 11
        assert by_team["A"].blended == pytest.approx(by_team["A"].season, abs=1e-12)

    def test_week_stamp_controls_the_blend(self, capsys, tmp_path):
        _write_csv(
            tmp_path / "m.csv",
            MATCHUPS_CSV_HEADER,
            [[2024, 1, "A", "B", 10.0], [2024, 2, "B", "A", -4.0]],
        )
        out = tmp_path / "r.csv"
        code, _, _ = _run(
            capsys, "ratings", "fit-season",
            "--matchups", str(tmp_path / "m.csv"), "--out", str(out), "--week", "6",
        )
        assert code == 0
        table, _ = load_ratings_csv(out)
        by_team = {r.team_id: r for r in table}
        # gamma(6) = 0.5 against a zero preseason column
        assert by_team["A"].blended == pytest.approx(0.5 * 3.5, abs=1e-9)
        assert by_team["A"].week == 6


class TestFitPreseason:
    TRUTH = {"A": 2.0, "B": -1.0, "C": 0.5, "D": -1.5}
    H = 2.0

    def _files(self, tmp_path):
        sched = [(h, a) for h in self.TRUTH for a in self.TRUTH if h != a]
        _write_csv(
            tmp_path / "m.csv",
            MATCHUPS_CSV_HEADER,
            [[2024, 1, h, a, 0.0] for h, a in sched],
        )
        lam = {t: expected_wins(t, sched, self.H, self.TRUTH) for t in self.TRUTH}
        _write_csv(
            tmp_path / "w.csv", WIN_TOTALS_CSV_HEADER, [[t, repr(v)] for t, v in lam.items()]
        )
        return sched, lam

    def test_win_totals_reproduced(self, capsys, tmp_path):
        sched, lam = self._files(tmp_path)
        out = tmp_path / "r.csv"
        code, stdout, _ = _run(
            capsys, "ratings", "fit-preseason",
            "--win-totals", str(tmp_path / "w.csv"),
            "--matchups", str(tmp_path / "m.csv"),
            "--out", str(out),
        )
        assert code == 0
        doc = json.loads(stdout)
        assert doc["objective"] < 1e-10
        assert doc["grad_norm"] < 1e-6
        table, _ = load_ratings_csv(out)
        fitted = {r.team_id: r.preseason for r in table}
        for t in self.TRUTH:
            got = expected_wins(t, sched, doc["home_edge"], fitted)
            assert got == pytest.approx(lam[t], abs=1e-6)
        # default stamp is week 1: blended equals the preseason rating
        by_team = {r.team_id: r for r in table}
        assert all(r.blended == pytest.approx(r.preseason, abs=1e-12) for r in table)
        assert by_team["A"].week == 1

    def test_seeded_runs_agree(self, capsys, tmp_path):
        self._files(tmp_path)
        outs = []
        for name, seed in (("r1.csv", "5"), ("r2.csv", "5")):
            out = tmp_path / name
            code, _, _ = _run(
                capsys, "ratings", "fit-preseason",
                "--win-totals", str(tmp_path / "w.csv"),
                "--matchups", str(tmp_path / "m.csv"),
                "--out", str(out), "--seed", seed,
            )
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestBlend:
    def _tables(self, tmp_path):
        from winprob import TeamRating, write_ratings_csv

        pre = [
            TeamRating(team_id="A", preseason=2.0, season=0.0, blended=2.0, week=1),
            TeamRating(team_id="B", preseason=-2.0, season=0.0, blended=-2.0, week=1),
        ]
        season = [
            TeamRating(team_id="A", preseason=0.0, season=4.0, blended=4.0, week=11),
            TeamRating(team_id="B", preseason=0.0, season=-4.0, blended=-4.0, week=11),
        ]
        write_ratings_csv(tmp_path / "pre.csv", pre, home_edge=None)
        write_ratings_csv(tmp_path / "season.csv", season, home_edge=2.5)
        return tmp_path / "pre.csv", tmp_path / "season.csv"

    def test_midseason_blend(self, capsys, tmp_path):
        pre, season = self._tables(tmp_path)
        out = tmp_path / "b.csv"
        code, stdout, _ = _run(
            capsys, "ratings", "blend",
            "--preseason", str(pre), "--season", str(season), "--week", "6", "--out", str(out),
        )
        assert code == 0
        doc = json.loads(stdout)
        assert doc["gamma"] == 0.5
        table, home_edge = load_ratings_csv(out)
        by_team = {r.team_id: r.blended for r in table}
        assert by_team["A"] == pytest.approx(0.5 * 2.0 + 0.5 * 4.0, abs=1e-12)
        assert by_team["B"] == pytest.approx(-3.0, abs=1e-12)
        assert home_edge == 2.5  # the season table's edge rides along

    def test_week_one_is_the_preseason_column(self, capsys, tmp_path):
        pre, season = self._tables(tmp_path)
        out = tmp_path / "b.csv"
        code, _, _ = _run(
            capsys, "ratings", "blend",
            "--preseason", str(pre), "--season", str(season), "--week", "1", "--out", str(out),
        )
        assert code == 0
        table, _ = load_ratings_csv(out)
        assert {r.team_id: r.blended for r in table} == {"A": 2.0, "B": -2.0}

    def test_week_required(self, capsys, tmp_path):
        pre, season = self._tables(tmp_path)
        code, _, stderr = _run(
            capsys, "ratings", "blend", "--preseason", str(pre), "--season", str(season)
        )
        assert code == 2
        assert "week" in json.loads(stderr)["error"]["message"]


class TestPagerank:
    def test_winner_outranks_loser(self, capsys, tmp_path):
        _write_csv(tmp_path / "m.csv", MATCHUPS_CSV_HEADER, [[2024, 1, "WIN", "LOSE", 10.0]])
        out = tmp_path / "pr.csv"
        code, stdout, _ = _run(
            capsys, "ratings", "pagerank", "--matchups", str(tmp_path / "m.csv"), "--out", str(out)
        )
        assert code == 0
        doc = json.loads(stdout)
        assert [r["team"] for r in doc["ranking"]] == ["WIN", "LOSE"]
        # exact 2-node solution at the default damping 0.85
        assert doc["ranking"][0]["score"] == pytest.approx(0.5 * 1.85, abs=1e-12)
        assert doc["ranking"][1]["score"] == pytest.approx(0.5, abs=1e-12)

        rows = list(csv.reader(open(out)))
        assert rows[0] == ["team", "score"]
        assert rows[1][0] == "WIN"
        # repr round-trips the float exactly
        assert float(rows[1][1]) == doc["ranking"][0]["score"]

    def test_alpha_validated(self, capsys, tmp_path):
        _write_csv(tmp_path / "m.csv", MATCHUPS_CSV_HEADER, [[2024, 1, "A", "B", 3.0]])
        code, _, stderr = _run(
            capsys, "ratings", "pagerank",
            "--matchups", str(tmp_path / "m.csv"), "--alpha", "1.5",
        )
        assert code == 2
        assert "alpha" in json.loads(stderr)["error"]["message"]


class TestTimeline:
    @pytest.fixture()
    def blowout(self, tmp_path):
        """One game whose home side pulls steadily ahead."""
        from winprob import PlayRecord, Possession

        rows = []
        for i in range(40):
            t = i * 88
            quarter = min(t // 900, 3) + 1
            clock = 900 - (t - (quarter - 1) * 900)
            rows.append(
                PlayRecord(
                    game_id="rout", season=2024, week=5, quarter=quarter,
                    clock_remaining_s=clock, possession=Possession.HOME,
                    down=1 + i % 4, yards_to_go=8, field_position=60,
                    home_score=i * 2, away_score=0, home_timeouts=3, away_timeouts=3,
                    home_possession_time_s=int(t * 0.7), home_won=1,
                )
            )
        shuffled = [rows[i] for i in np.random.default_rng(0).permutation(40)]
        write_play_log(shuffled, tmp_path / "one.csv")
        _write_csv(tmp_path / "gr.csv", GAME_RATINGS_CSV_HEADER, [["rout", "8.0"]])
        return tmp_path

    def test_rows_sorted_and_marked(self, capsys, blowout, model_path):
        code, stdout, _ = _run(
            capsys, "timeline",
            "--model", str(model_path),
            "--data", str(blowout / "one.csv"),
            "--ratings", str(blowout / "gr.csv"),
            "--game-id", "rout",
        )
        assert code == 0
        doc = json.loads(stdout)
        assert doc["game_id"] == "rout" and doc["model_type"] == "glm"
        times = [t for t, _ in doc["rows"]]
        assert times == sorted(times) and len(times) == 40
        probs = [p for _, p in doc["rows"]]
        assert doc["min_p_home"] == min(probs)
        assert doc["min_time_elapsed_s"] == times[int(np.argmin(probs))]
        # a runaway lead must end near certainty and above its start
        assert probs[-1] > 0.95
        assert probs[-1] > probs[0]
        assert np.mean(probs[-5:]) > np.mean(probs[:5])

    def test_csv_format(self, capsys, blowout, model_path):
        code, stdout, _ = _run(
            capsys, "timeline",
            "--model", str(model_path),
            "--data", str(blowout / "one.csv"),
            "--ratings", str(blowout / "gr.csv"),
            "--game-id", "rout",
            "--format", "csv",
        )
        assert code == 0
        rows = list(csv.reader(io.StringIO(stdout)))
        assert rows[0] == ["time_elapsed_s", "p_home"]
        assert len(rows) == 41
        assert all(0.0 < float(r[1]) < 1.0 for r in rows[1:])

    def test_unknown_game_id(self, capsys, blowout, model_path):
        code, _, stderr = _run(
            capsys, "timeline",
            "--model", str(model_path),
            "--data", str(blowout / "one.csv"),
            "--ratings", str(blowout / "gr.csv"),
            "--game-id", "ghost",
        )
        assert code == 2
        assert "ghost" in json.loads(stderr)["error"]["message"]


class TestConfigFile:
    def test_config_supplies_defaults_and_flags_override(self, capsys, workdir):
        cfg = workdir / "train.cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "data": str(workdir / "plays.csv"),
                    "ratings": str(workdir / "game_ratings.csv"),
                    "out": str(workdir / "from_config.json"),
                    "seed": 5,
                }
            )
        )
        code, stdout, _ = _run(capsys, "--config", str(cfg), "train")
        assert code == 0
        assert json.loads(stdout)["seed"] == 5

        code, stdout, _ = _run(capsys, "--config", str(cfg), "train", "--seed", "7")
        assert code == 0
        assert json.loads(stdout)["seed"] == 7

    def test_invalid_json_config(self, capsys, workdir):
        cfg = workdir / "broken.cfg.json"
        cfg.write_text("{not json")
        code, _, stderr = _run(capsys, "--config", str(cfg), "selftest")
        assert code == 2
        assert json.loads(stderr)["error"]["type"] == "SchemaError"

    def test_non_object_config(self, capsys, workdir):
        cfg = workdir / "list.cfg.json"
        cfg.write_text("[1, 2]")
        code, _, stderr = _run(capsys, "--config", str(cfg), "selftest")
        assert code == 2

    def test_starved_solver_exits_one(self, capsys, workdir):
        cfg = workdir / "starved.cfg.json"
        cfg.write_text(json.dumps({"max_iter": 2}))
        code, stdout, stderr = _run(
            capsys,
            "--config", str(cfg),
            "train",
            "--data", str(workdir / "plays.csv"),
            "--ratings", str(workdir / "game_ratings.csv"),
            "--out", str(workdir / "never.json"),
            "--seed", "1",
        )
        assert code == 1 and stdout == ""
        err = json.loads(stderr)["error"]
        assert err["type"] == "ConvergenceError"
        assert "did not converge" in err["message"]


class TestSelftest:
    def test_all_checks_pass(self, capsys):
        code, stdout, _ = _run(capsys, "selftest")
        assert code == 0
        doc = json.loads(stdout)
        assert doc["failed"] == 0
        assert doc["passed"] == len(doc["checks"]) >= 8
        assert all(c["ok"] for c in doc["checks"])


class TestArgparseSurface:
    def test_missing_subcommand_exits_two(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main([])
        assert exc_info.value.code == 2

    def test_serve_requires_model(self, capsys):
        code, _, stderr = _run(capsys, "serve")
        assert code == 2
        assert "model" in json.loads(stderr)["error"]["message"]

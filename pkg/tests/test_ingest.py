"""Play-log CSV parsing, dataset assembly, and the by-game split."""

import io
import logging

import numpy as np
import pytest

from winprob import (
    ConstantRatingBook,
    CsvFormatError,
    PlayRecord,
    Possession,
    RatingBook,
    RatingLookupError,
    ValidationError,
    build_dataset,
    gen_play_records,
    load_dataset,
    parse_play_log,
    split_dataset,
    state_from_play,
    write_play_log,
)
from winprob.ingest import PLAYS_CSV_HEADER

HEADER = ",".join(PLAYS_CSV_HEADER)


def _row(
    gid="g1",
    season=2024,
    week=5,
    quarter=1,
    clock=900,
    poss="H",
    down=1,
    ytg=10,
    fp=25,
    hs=0,
    aws=0,
    hto=3,
    ato=3,
    hpt=0,
    won=1,
):
    return f"{gid},{season},{week},{quarter},{clock},{poss},{down},{ytg},{fp},{hs},{aws},{hto},{ato},{hpt},{won}"


def _csv(*rows):
    return ("\n".join([HEADER, *rows]) + "\n").encode()


class TestParsePlayLog:
    def test_parses_fields(self):
        plays, errors = parse_play_log(
            _csv(_row(quarter=3, clock=300, poss="A", down=4, ytg=2, fp=71, hs=14, aws=10, won=0))
        )
        assert errors == []
        (p,) = plays
        assert p.game_id == "g1"
        assert p.quarter == 3 and p.clock_remaining_s == 300
        assert p.possession is Possession.AWAY
        assert (p.down, p.yards_to_go, p.field_position) == (4, 2, 71)
        assert (p.home_score, p.away_score, p.home_won) == (14, 10, 0)

    def test_header_must_match_exactly(self):
        shuffled = HEADER.split(",")
        shuffled[0], shuffled[1] = shuffled[1], shuffled[0]
        with pytest.raises(CsvFormatError, match="bad header"):
            parse_play_log((",".join(shuffled) + "\n" + _row()).encode())

    def test_empty_input(self):
        with pytest.raises(CsvFormatError, match="missing header"):
            parse_play_log(b"")

    def test_row_errors_carry_line_numbers(self):
        plays, errors = parse_play_log(
            _csv(*([_row()] * 150 + [_row(down=6, ytg=1)])), max_error_fraction=0.01
        )
        assert len(plays) == 150
        (err,) = errors
        assert err.line == 152  # header is line 1
        assert "down out of range 0..4: 6" in err.message

    def test_non_integer_field_reported(self):
        _, errors = parse_play_log(
            _csv(*([_row()] * 150 + [_row(week="soon")])), max_error_fraction=0.01
        )
        assert "week must be an integer" in errors[0].message

    def test_wrong_field_count_reported(self):
        _, errors = parse_play_log(
            _csv(*([_row()] * 150 + ["a,b,c"])), max_error_fraction=0.01
        )
        assert "expected 15 fields, got 3" in errors[0].message

    def test_blank_lines_skipped(self):
        plays, errors = parse_play_log((HEADER + "\n\n" + _row() + "\n\n").encode())
        assert len(plays) == 1 and errors == []

    def test_error_fraction_boundary(self):
        good = [_row() for _ in range(99)]
        bad = _row(down=5, ytg=1)
        plays, errors = parse_play_log(_csv(*good, bad))  # 1 of 100 sits exactly on the limit
        assert len(plays) == 99 and len(errors) == 1
        with pytest.raises(CsvFormatError, match="malformed"):
            parse_play_log(_csv(*good[:98], bad, bad))  # 2 of 100 crosses it

    def test_zero_tolerance(self):
        with pytest.raises(CsvFormatError):
            parse_play_log(_csv(_row(), _row(down=5, ytg=1)), max_error_fraction=0.0)

    def test_failure_report_samples_first_rows(self):
        rows = [_row(down=5, ytg=1) for _ in range(5)]
        with pytest.raises(CsvFormatError, match="line 2.*line 3.*line 4") as exc_info:
            parse_play_log(_csv(*rows))
        assert "line 5" not in str(exc_info.value)

    def test_path_and_handle_sources_agree(self, tmp_path):
        plays, _ = gen_play_records(n_games=4, seed=3)
        path = tmp_path / "plays.csv"
        write_play_log(plays, path)
        from_path, _ = parse_play_log(path)
        with open(path, encoding="utf-8", newline="") as fh:
            from_handle, _ = parse_play_log(fh)
        assert from_path == from_handle == list(plays)


class TestWriteRoundTrip:
    def test_write_then_parse_is_identity(self, tmp_path):
        plays, _ = gen_play_records(n_games=6, seed=11)
        path = tmp_path / "plays.csv"
        write_play_log(plays, path)
        again, errors = parse_play_log(path)
        assert errors == []
        assert again == list(plays)


class TestBuildDataset:
    def test_labels_and_counts(self, constant_book):
        plays, _ = gen_play_records(n_games=5, seed=7)
        ds = build_dataset(plays, constant_book, source="unit")
        assert len(ds) == len(plays)
        want_label = {p.game_id: p.home_won for p in plays}
        for (state, label), gid in zip(ds.pairs, ds.game_ids):
            assert label == want_label[gid]
        assert ds.provenance.games == len(want_label)
        assert ds.provenance.plays == len(plays)
        assert ds.provenance.source == "unit"

    def test_states_match_direct_conversion(self, constant_book):
        plays, _ = gen_play_records(n_games=2, seed=8)
        ds = build_dataset(plays, constant_book)
        for (state, _), play in zip(ds.pairs, plays):
            assert state == state_from_play(play, constant_book)

    def test_tied_game_excluded_and_logged(self, constant_book, caplog):
        def game(gid, final_home, final_away, won):
            return [
                PlayRecord(
                    game_id=gid, season=2024, week=3, quarter=1, clock_remaining_s=500,
                    possession=Possession.HOME, down=1, yards_to_go=10, field_position=30,
                    home_score=0, away_score=0, home_timeouts=3, away_timeouts=3,
                    home_possession_time_s=100, home_won=won,
                ),
                PlayRecord(
                    game_id=gid, season=2024, week=3, quarter=4, clock_remaining_s=0,
                    possession=Possession.NONE, down=0, yards_to_go=0, field_position=50,
                    home_score=final_home, away_score=final_away, home_timeouts=0,
                    away_timeouts=0, home_possession_time_s=1700, home_won=won,
                ),
            ]

        plays = game("tied", 21, 21, 1) + game("won", 24, 17, 1)
        with caplog.at_level(logging.INFO, logger="winprob.ingest"):
            ds = build_dataset(plays, constant_book)
        assert set(ds.game_ids) == {"won"}
        assert ds.provenance.games == 1 and len(ds) == 2
        assert any("tied" in r.message for r in caplog.records)

    def test_all_games_tied_rejected(self, constant_book):
        rows = [
            PlayRecord(
                game_id="t", season=2024, week=1, quarter=4, clock_remaining_s=0,
                possession=Possession.NONE, down=0, yards_to_go=0, field_position=50,
                home_score=7, away_score=7, home_timeouts=0, away_timeouts=0,
                home_possession_time_s=1800, home_won=0,
            )
        ]
        with pytest.raises(ValidationError, match="tied"):
            build_dataset(rows, constant_book)

    def test_conflicting_labels_rejected(self, constant_book):
        import dataclasses

        plays, _ = gen_play_records(n_games=1, seed=9)
        flipped = dataclasses.replace(plays[0], home_won=1 - plays[0].home_won)
        with pytest.raises(ValidationError, match="conflicting home_won"):
            build_dataset(list(plays) + [flipped], constant_book)

    def test_missing_ratings_aggregated(self):
        plays, _ = gen_play_records(n_games=3, seed=10)
        with pytest.raises(RatingLookupError, match=r"3 rating gap\(s\)"):
            build_dataset(plays, RatingBook())

    def test_empty_rejected(self, constant_book):
        with pytest.raises(ValidationError):
            build_dataset([], constant_book)


@pytest.fixture(scope="module")
def big(constant_book):
    plays, _ = gen_play_records(n_games=100, seed=21)
    return build_dataset(plays, constant_book, source="plays.csv")


class TestSplitDataset:
    def test_split_is_game_disjoint(self, big):
        train, test = split_dataset(big, 0.8, seed=0)
        assert set(train.game_ids).isdisjoint(test.game_ids)
        assert set(train.game_ids) | set(test.game_ids) == set(big.game_ids)
        assert len(set(train.game_ids)) == 80
        assert len(train) + len(test) == len(big)

    def test_whole_games_move_together(self, big):
        train, test = split_dataset(big, 0.7, seed=4)
        rows_per_game = {}
        for gid in big.game_ids:
            rows_per_game[gid] = rows_per_game.get(gid, 0) + 1
        for side in (train, test):
            counts = {}
            for gid in side.game_ids:
                counts[gid] = counts.get(gid, 0) + 1
            assert all(counts[g] == rows_per_game[g] for g in counts)

    def test_provenance_tags(self, big):
        train, test = split_dataset(big, 0.8, seed=0)
        assert train.provenance.source == "plays.csv#train"
        assert test.provenance.source == "plays.csv#test"
        assert train.provenance.games == 80 and test.provenance.games == 20

    def test_deterministic_and_seed_sensitive(self, big):
        a1, _ = split_dataset(big, 0.8, seed=5)
        a2, _ = split_dataset(big, 0.8, seed=5)
        b1, _ = split_dataset(big, 0.8, seed=6)
        assert a1.game_ids == a2.game_ids
        assert set(a1.game_ids) != set(b1.game_ids)

    def test_both_sides_get_a_game(self, constant_book):
        plays, _ = gen_play_records(n_games=2, seed=22)
        ds = build_dataset(plays, constant_book)
        for fraction in (0.001, 0.999):
            train, test = split_dataset(ds, fraction, seed=1)
            assert len(set(train.game_ids)) == 1
            assert len(set(test.game_ids)) == 1

    def test_validation(self, big, constant_book):
        for bad in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(ValidationError):
                split_dataset(big, bad, seed=0)
        one = build_dataset(gen_play_records(n_games=1, seed=23)[0], constant_book)
        with pytest.raises(ValidationError, match="at least 2 games"):
            split_dataset(one, 0.5, seed=0)


class TestLoadDataset:
    def test_load_composes_parse_and_build(self, tmp_path, constant_book):
        plays, _ = gen_play_records(n_games=3, seed=30)
        path = tmp_path / "plays.csv"
        write_play_log(plays, path)
        ds = load_dataset(path, constant_book)
        assert ds == build_dataset(plays, constant_book, source=str(path))

    def test_malformed_rows_warned(self, tmp_path, constant_book, caplog):
        plays, _ = gen_play_records(n_games=4, seed=31)
        path = tmp_path / "plays.csv"
        write_play_log(plays, path)
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(_row(gid=plays[0].game_id, down=5, ytg=1) + "\n")
        with caplog.at_level(logging.WARNING, logger="winprob.ingest"):
            ds = load_dataset(path, constant_book)
        assert len(ds) == len(plays)
        assert any("malformed" in r.message for r in caplog.records)

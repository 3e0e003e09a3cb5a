"""Play-log CSV parsing, labeled-dataset assembly, and the train/test split.

The split is by whole game: snaps within one game are highly correlated,
so splitting by play would leak outcome information across the boundary.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .core import GameState, PlayRecord, Possession, RatingLookup, state_from_play, time_elapsed_from_clock
from .errors import CsvFormatError, RatingLookupError, ValidationError

logger = logging.getLogger(__name__)

PLAYS_CSV_HEADER = [
    "game_id",
    "season",
    "week",
    "quarter",
    "clock_remaining_s",
    "possession",
    "down",
    "yards_to_go",
    "field_position",
    "home_score",
    "away_score",
    "home_timeouts",
    "away_timeouts",
    "home_possession_time_s",
    "home_won",
]


@dataclass(frozen=True)
class RowError:
    """One rejected CSV row; line numbers are 1-based including the header."""

    line: int
    message: str


@dataclass(frozen=True)
class Provenance:
    source: str
    games: int
    plays: int


@dataclass(frozen=True)
class Dataset:
    """Ordered (state, label) pairs with parallel game ids.

    Labels are constant within a game; the provenance counts must match the
    stored rows.
    """

    pairs: Tuple[Tuple[GameState, int], ...]
    game_ids: Tuple[str, ...]
    provenance: Provenance

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        object.__setattr__(self, "game_ids", tuple(self.game_ids))
        if len(self.pairs) != len(self.game_ids):
            raise ValidationError("need exactly one game id per (state, label) pair")
        per_game: Dict[str, int] = {}
        for (_, label), gid in zip(self.pairs, self.game_ids):
            if label not in (0, 1):
                raise ValidationError(f"label must be 0 or 1, got {label!r}")
            if per_game.setdefault(gid, label) != label:
                raise ValidationError(f"game {gid!r} carries conflicting labels")
        if self.provenance.plays != len(self.pairs):
            raise ValidationError("provenance plays count does not match rows")
        if self.provenance.games != len(per_game):
            raise ValidationError("provenance games count does not match distinct game ids")

    def __len__(self) -> int:
        return len(self.pairs)

    def states(self) -> List[GameState]:
        return [s for s, _ in self.pairs]

    def labels(self) -> np.ndarray:
        return np.array([y for _, y in self.pairs], dtype=int)


def _coerce_row(fields: List[str]) -> PlayRecord:
    if len(fields) != len(PLAYS_CSV_HEADER):
        raise ValidationError(f"expected {len(PLAYS_CSV_HEADER)} fields, got {len(fields)}")
    try:
        possession = Possession(fields[5])
    except ValueError:
        raise ValidationError(f"possession must be one of H, A, N, got {fields[5]!r}")
    ints = {}
    for name, raw in zip(PLAYS_CSV_HEADER, fields):
        if name in ("game_id", "possession"):
            continue
        try:
            ints[name] = int(raw)
        except ValueError:
            raise ValidationError(f"{name} must be an integer, got {raw!r}")
    return PlayRecord(game_id=fields[0], possession=possession, **ints)


def parse_play_log(source, max_error_fraction: float = 0.01) -> Tuple[List[PlayRecord], List[RowError]]:
    """Parse the documented play CSV; collect malformed rows, never drop them
    silently.

    `source` may be a path, UTF-8 bytes, or a text file object. A missing or
    reordered header is fatal, as is a malformed-row fraction above
    max_error_fraction.
    """
    if isinstance(source, bytes):
        fh = io.StringIO(source.decode("utf-8"))
        close = False
    elif hasattr(source, "read"):
        fh = source
        close = False
    else:
        fh = open(source, newline="", encoding="utf-8")
        close = True
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("empty input: missing header")
        if header != PLAYS_CSV_HEADER:
            raise CsvFormatError(
                f"bad header: expected {','.join(PLAYS_CSV_HEADER)!r}, got {','.join(header)!r}"
            )
        plays: List[PlayRecord] = []
        errors: List[RowError] = []
        for line_no, fields in enumerate(reader, start=2):
            if not fields:
                continue
            try:
                plays.append(_coerce_row(fields))
            except ValidationError as exc:
                errors.append(RowError(line=line_no, message=str(exc)))
    finally:
        if close:
            fh.close()
    total = len(plays) + len(errors)
    if errors and total and len(errors) / total > max_error_fraction:
        sample = "; ".join(f"line {e.line}: {e.message}" for e in errors[:3])
        raise CsvFormatError(
            f"{len(errors)} of {total} rows malformed (limit {max_error_fraction:.0%}): {sample}"
        )
    return plays, errors


def write_play_log(plays: Sequence[PlayRecord], path) -> None:
    """Serialize plays back to the documented CSV; inverse of parse."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(PLAYS_CSV_HEADER)
        for p in plays:
            writer.writerow(
                [
                    p.game_id,
                    p.season,
                    p.week,
                    p.quarter,
                    p.clock_remaining_s,
                    p.possession.value,
                    p.down,
                    p.yards_to_go,
                    p.field_position,
                    p.home_score,
                    p.away_score,
                    p.home_timeouts,
                    p.away_timeouts,
                    p.home_possession_time_s,
                    p.home_won,
                ]
            )


def build_dataset(plays: Sequence[PlayRecord], ratings: RatingLookup, source: str = "<memory>") -> Dataset:
    """Label every play with its game's outcome and attach rating diffs.

    Games whose final logged row shows an equal scoreline are treated as
    ties, excluded, and logged (the home_won column cannot encode a tie).
    Missing ratings are collected across all plays and raised as one error.
    """
    if not plays:
        raise ValidationError("no plays to assemble")
    by_game: Dict[str, List[PlayRecord]] = {}
    for p in plays:
        by_game.setdefault(p.game_id, []).append(p)

    missing: List[str] = []
    pairs: List[Tuple[GameState, int]] = []
    game_ids: List[str] = []
    excluded: List[str] = []
    for gid, rows in by_game.items():
        labels = {p.home_won for p in rows}
        if len(labels) != 1:
            raise ValidationError(f"game {gid!r} carries conflicting home_won values")
        last = max(rows, key=lambda p: time_elapsed_from_clock(p.quarter, p.clock_remaining_s))
        if last.home_score == last.away_score:
            excluded.append(gid)
            continue
        label = labels.pop()
        for p in rows:
            try:
                pairs.append((state_from_play(p, ratings), label))
                game_ids.append(gid)
            except RatingLookupError as exc:
                msg = str(exc)
                if msg not in missing:
                    missing.append(msg)
    if missing:
        raise RatingLookupError(f"{len(missing)} rating gap(s): " + "; ".join(missing))
    if excluded:
        logger.info("excluded %d tied game(s): %s", len(excluded), ", ".join(sorted(excluded)))
    if not pairs:
        raise ValidationError("every game was excluded as tied; nothing to assemble")
    return Dataset(
        pairs=tuple(pairs),
        game_ids=tuple(game_ids),
        provenance=Provenance(source=source, games=len(by_game) - len(excluded), plays=len(pairs)),
    )


def load_dataset(path, ratings: RatingLookup, max_error_fraction: float = 0.01) -> Dataset:
    """parse_play_log + build_dataset for a file path."""
    plays, errors = parse_play_log(path, max_error_fraction)
    if errors:
        logger.warning("%d malformed row(s) skipped in %s", len(errors), path)
    return build_dataset(plays, ratings, source=str(path))


def split_dataset(ds: Dataset, train_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Seeded split by whole game; both sides always get at least one game.

    The number of training games is round(fraction * games), so measured in
    games the proportion lands within one game of the target.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    seen: Dict[str, None] = {}
    for gid in ds.game_ids:
        seen.setdefault(gid, None)
    ids = list(seen)
    if len(ids) < 2:
        raise ValidationError("need at least 2 games to split")
    rng = np.random.default_rng(seed)
    order = [ids[i] for i in rng.permutation(len(ids))]
    n_train = round(train_fraction * len(ids))
    n_train = min(max(n_train, 1), len(ids) - 1)
    train_ids = set(order[:n_train])

    def subset(keep_train: bool, tag: str) -> Dataset:
        pairs = []
        gids = []
        for pair, gid in zip(ds.pairs, ds.game_ids):
            if (gid in train_ids) == keep_train:
                pairs.append(pair)
                gids.append(gid)
        return Dataset(
            pairs=tuple(pairs),
            game_ids=tuple(gids),
            provenance=Provenance(
                source=f"{ds.provenance.source}#{tag}", games=len(set(gids)), plays=len(pairs)
            ),
        )

    return subset(True, "train"), subset(False, "test")

"""Shared domain types: plays, game states, design rows, models, reports.

Everything in this module is an immutable value object with a canonical JSON
encoding (top-level ``"schema_version": 1``). No I/O and no learning logic
lives here; the other modules build on these types.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Optional, Protocol, Tuple

import numpy as np

from .errors import SchemaError, ValidationError

SCHEMA_VERSION = 1

QUARTER_S = 900
REGULATION_S = 3600

#: Fixed layout of the 21-column design row (raw scale). The time_elapsed
#: column and its products hold time as a fraction of regulation (t / 3600).
FEATURE_NAMES: Tuple[str, ...] = (
    "poss_home",
    "score_diff",
    "home_timeouts",
    "away_timeouts",
    "home_possession_time",
    "time_elapsed",
    "rating_diff",
    "down_1",
    "down_2",
    "down_3",
    "down_4",
    "field_position",
    "yards_to_go",
    "poss_home_x_down_1",
    "poss_home_x_down_2",
    "poss_home_x_down_3",
    "poss_home_x_down_4",
    "poss_home_x_field_position",
    "poss_home_x_yards_to_go",
    "time_elapsed_x_rating_diff",
    "time_elapsed_x_score_diff",
)

N_FEATURES = len(FEATURE_NAMES)


class Possession(enum.Enum):
    """Which side has the ball; NONE covers kickoffs and similar dead-ball rows."""

    HOME = "H"
    AWAY = "A"
    NONE = "N"


def _check_int(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    return int(value)


def _check_range(name: str, value, lo: int, hi: int) -> int:
    value = _check_int(name, value)
    if not lo <= value <= hi:
        raise ValidationError(f"{name} out of range {lo}..{hi}: {value}")
    return value


def _require_version(d: Mapping) -> None:
    v = d.get("schema_version")
    if v != SCHEMA_VERSION:
        raise SchemaError(f"expected schema_version {SCHEMA_VERSION}, found {v!r}")


def canonical_json(d: Mapping) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(d, sort_keys=True, indent=2) + "\n"


def _frozen_array(values, n: Optional[int] = None) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if n is not None and arr.shape != (n,):
        raise ValidationError(f"expected vector of length {n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("vector contains non-finite entries")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PlayRecord:
    """One raw play-by-play log row.

    ``field_position`` counts yards advanced from the possessing team's own
    goal line (0..100). ``down`` 0 marks no-down plays (kickoffs, PATs) and
    must pair with ``yards_to_go`` 0. ``home_won`` is the game-level label
    repeated on every row of the game.
    """

    game_id: str
    season: int
    week: int
    quarter: int
    clock_remaining_s: int
    possession: Possession
    down: int
    yards_to_go: int
    field_position: int
    home_score: int
    away_score: int
    home_timeouts: int
    away_timeouts: int
    home_possession_time_s: int
    home_won: int

    def __post_init__(self):
        if not isinstance(self.game_id, str) or not self.game_id:
            raise ValidationError("game_id must be a nonempty string")
        if not isinstance(self.possession, Possession):
            raise ValidationError(f"possession must be a Possession, got {self.possession!r}")
        _check_int("season", self.season)
        _check_range("week", self.week, 1, 17)
        _check_range("quarter", self.quarter, 1, 5)
        _check_range("clock_remaining_s", self.clock_remaining_s, 0, QUARTER_S)
        _check_range("down", self.down, 0, 4)
        _check_range("yards_to_go", self.yards_to_go, 0, 99)
        _check_range("field_position", self.field_position, 0, 100)
        _check_range("home_timeouts", self.home_timeouts, 0, 3)
        _check_range("away_timeouts", self.away_timeouts, 0, 3)
        if _check_int("home_score", self.home_score) < 0:
            raise ValidationError("home_score must be nonnegative")
        if _check_int("away_score", self.away_score) < 0:
            raise ValidationError("away_score must be nonnegative")
        if _check_int("home_possession_time_s", self.home_possession_time_s) < 0:
            raise ValidationError("home_possession_time_s must be nonnegative")
        if self.home_won not in (0, 1):
            raise ValidationError(f"home_won must be 0 or 1, got {self.home_won!r}")
        if (self.down == 0) != (self.yards_to_go == 0):
            raise ValidationError("down 0 must pair with yards_to_go 0 (no-down plays carry no distance)")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "game_id": self.game_id,
            "season": self.season,
            "week": self.week,
            "quarter": self.quarter,
            "clock_remaining_s": self.clock_remaining_s,
            "possession": self.possession.value,
            "down": self.down,
            "yards_to_go": self.yards_to_go,
            "field_position": self.field_position,
            "home_score": self.home_score,
            "away_score": self.away_score,
            "home_timeouts": self.home_timeouts,
            "away_timeouts": self.away_timeouts,
            "home_possession_time_s": self.home_possession_time_s,
            "home_won": self.home_won,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PlayRecord":
        _require_version(d)
        try:
            possession = Possession(d["possession"])
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"bad possession value: {d.get('possession')!r}") from exc
        try:
            return cls(
                game_id=d["game_id"],
                season=d["season"],
                week=d["week"],
                quarter=d["quarter"],
                clock_remaining_s=d["clock_remaining_s"],
                possession=possession,
                down=d["down"],
                yards_to_go=d["yards_to_go"],
                field_position=d["field_position"],
                home_score=d["home_score"],
                away_score=d["away_score"],
                home_timeouts=d["home_timeouts"],
                away_timeouts=d["away_timeouts"],
                home_possession_time_s=d["home_possession_time_s"],
                home_won=d["home_won"],
            )
        except KeyError as exc:
            raise SchemaError(f"missing PlayRecord field: {exc}") from exc


@dataclass(frozen=True)
class GameState:
    """Normalized in-game snapshot consumed by every predictor.

    ``time_elapsed_s`` runs from kickoff; values past 3600 are overtime.
    ``rating_diff`` is the points-scale strength gap between home and away,
    home edge included.
    """

    time_elapsed_s: int
    score_diff: int
    possession: Possession
    down: int
    yards_to_go: int
    field_position: int
    home_timeouts: int
    away_timeouts: int
    home_possession_time_s: int
    rating_diff: float

    def __post_init__(self):
        if not isinstance(self.possession, Possession):
            raise ValidationError(f"possession must be a Possession, got {self.possession!r}")
        if _check_int("time_elapsed_s", self.time_elapsed_s) < 0:
            raise ValidationError("time_elapsed_s must be nonnegative")
        _check_int("score_diff", self.score_diff)
        _check_range("down", self.down, 0, 4)
        _check_range("yards_to_go", self.yards_to_go, 0, 99)
        _check_range("field_position", self.field_position, 0, 100)
        _check_range("home_timeouts", self.home_timeouts, 0, 3)
        _check_range("away_timeouts", self.away_timeouts, 0, 3)
        if _check_int("home_possession_time_s", self.home_possession_time_s) < 0:
            raise ValidationError("home_possession_time_s must be nonnegative")
        if (self.down == 0) != (self.yards_to_go == 0):
            raise ValidationError("down 0 must pair with yards_to_go 0 (no-down plays carry no distance)")
        if not isinstance(self.rating_diff, (float, int, np.floating, np.integer)) or isinstance(self.rating_diff, bool):
            raise ValidationError(f"rating_diff must be a real number, got {self.rating_diff!r}")
        object.__setattr__(self, "rating_diff", float(self.rating_diff))
        if not math.isfinite(self.rating_diff):
            raise ValidationError("rating_diff must be finite")

    @property
    def overtime(self) -> bool:
        return self.time_elapsed_s > REGULATION_S

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "time_elapsed_s": self.time_elapsed_s,
            "score_diff": self.score_diff,
            "possession": self.possession.value,
            "down": self.down,
            "yards_to_go": self.yards_to_go,
            "field_position": self.field_position,
            "home_timeouts": self.home_timeouts,
            "away_timeouts": self.away_timeouts,
            "home_possession_time_s": self.home_possession_time_s,
            "rating_diff": self.rating_diff,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "GameState":
        _require_version(d)
        try:
            possession = Possession(d["possession"])
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"bad possession value: {d.get('possession')!r}") from exc
        try:
            return cls(
                time_elapsed_s=d["time_elapsed_s"],
                score_diff=d["score_diff"],
                possession=possession,
                down=d["down"],
                yards_to_go=d["yards_to_go"],
                field_position=d["field_position"],
                home_timeouts=d["home_timeouts"],
                away_timeouts=d["away_timeouts"],
                home_possession_time_s=d["home_possession_time_s"],
                rating_diff=d["rating_diff"],
            )
        except KeyError as exc:
            raise SchemaError(f"missing GameState field: {exc}") from exc


class RatingLookup(Protocol):
    """Anything that can resolve a play's team-strength differential."""

    def rating_diff_for(self, game_id: str, season: int, week: int) -> float:
        ...


def time_elapsed_from_clock(quarter: int, clock_remaining_s: int) -> int:
    """Seconds since kickoff; quarter 5 extends linearly past regulation."""
    return QUARTER_S * (quarter - 1) + (QUARTER_S - clock_remaining_s)


def state_from_play(play: PlayRecord, ratings: RatingLookup) -> GameState:
    """Normalize a raw play row into a GameState using a rating lookup.

    Pure and deterministic. Raises RatingLookupError (from the lookup) when
    a team rating for the play's season/week is missing.
    """
    return GameState(
        time_elapsed_s=time_elapsed_from_clock(play.quarter, play.clock_remaining_s),
        score_diff=play.home_score - play.away_score,
        possession=play.possession,
        down=play.down,
        yards_to_go=play.yards_to_go,
        field_position=play.field_position,
        home_timeouts=play.home_timeouts,
        away_timeouts=play.away_timeouts,
        home_possession_time_s=play.home_possession_time_s,
        rating_diff=ratings.rating_diff_for(play.game_id, play.season, play.week),
    )


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Raw-scale design row; layout fixed by FEATURE_NAMES."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values, N_FEATURES))

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return bool(np.array_equal(self.values, other.values))

    def __getitem__(self, name: str) -> float:
        return float(self.values[FEATURE_NAMES.index(name)])

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "values": [float(v) for v in self.values]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "FeatureVector":
        _require_version(d)
        return cls(values=d["values"])


@dataclass(frozen=True, eq=False)
class StandardizationStats:
    """Per-column mean and standard deviation (N-1 divisor), training data only."""

    mean: np.ndarray
    sd: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen_array(self.mean, N_FEATURES))
        object.__setattr__(self, "sd", _frozen_array(self.sd, N_FEATURES))
        if np.any(self.sd <= 0):
            bad = [FEATURE_NAMES[i] for i in np.nonzero(self.sd <= 0)[0]]
            raise ValidationError(f"standard deviations must be positive; offending columns: {bad}")

    def __eq__(self, other):
        if not isinstance(other, StandardizationStats):
            return NotImplemented
        return bool(np.array_equal(self.mean, other.mean) and np.array_equal(self.sd, other.sd))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "mean": [float(v) for v in self.mean],
            "sd": [float(v) for v in self.sd],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "StandardizationStats":
        _require_version(d)
        return cls(mean=d["mean"], sd=d["sd"])


@dataclass(frozen=True)
class TrainingMeta:
    """How a model was fitted: seed, iteration count, final objective value.

    The objective is the penalized log-likelihood for the GLM and the final
    training loss for the neural network; 0.0 for closed-form fits.
    """

    seed: Optional[int]
    iterations: int
    final_objective: float

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "seed": self.seed,
            "iterations": self.iterations,
            "final_objective": self.final_objective,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TrainingMeta":
        _require_version(d)
        return cls(seed=d["seed"], iterations=d["iterations"], final_objective=d["final_objective"])


@dataclass(frozen=True, eq=False)
class GlmModel:
    """Logistic model: p(home win) = sigmoid(intercept + w . z(x)).

    Weights live on the standardized scale; prediction always standardizes
    with the embedded stats first.
    """

    intercept: float
    weights: np.ndarray
    stats: StandardizationStats
    meta: TrainingMeta

    model_type = "glm"

    def __post_init__(self):
        if not math.isfinite(self.intercept):
            raise ValidationError("intercept must be finite")
        object.__setattr__(self, "weights", _frozen_array(self.weights, N_FEATURES))

    def __eq__(self, other):
        if not isinstance(other, GlmModel):
            return NotImplemented
        return (
            self.intercept == other.intercept
            and bool(np.array_equal(self.weights, other.weights))
            and self.stats == other.stats
            and self.meta == other.meta
        )

    def raw_coefficients(self) -> Tuple[float, np.ndarray]:
        """Map the fitted coefficients back to the raw feature scale.

        Returns (intercept_raw, weights_raw) such that
        intercept + w . z(x) == intercept_raw + weights_raw . x for all x.
        """
        w_raw = self.weights / self.stats.sd
        b_raw = self.intercept - float(np.sum(self.weights * self.stats.mean / self.stats.sd))
        return b_raw, w_raw

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "model_type": self.model_type,
            "stats": self.stats.to_dict(),
            "params": {
                "intercept": self.intercept,
                "weights": [float(v) for v in self.weights],
            },
            "training_meta": self.meta.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "GlmModel":
        _require_version(d)
        if d.get("model_type") != cls.model_type:
            raise SchemaError(f"expected model_type {cls.model_type!r}, found {d.get('model_type')!r}")
        params = d["params"]
        return cls(
            intercept=params["intercept"],
            weights=params["weights"],
            stats=StandardizationStats.from_dict(d["stats"]),
            meta=TrainingMeta.from_dict(d["training_meta"]),
        )


@dataclass(frozen=True)
class PlattParams:
    """Sigmoid calibration map p = 1 / (1 + exp(a * score + b))."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValidationError("Platt parameters must be finite")

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "a": self.a, "b": self.b}

    @classmethod
    def from_dict(cls, d: Mapping) -> "PlattParams":
        _require_version(d)
        return cls(a=d["a"], b=d["b"])


@dataclass(frozen=True)
class TeamRating:
    """Preseason, in-season and blended strength (points vs league average)."""

    team_id: str
    preseason: float
    season: float
    blended: float
    week: int

    def __post_init__(self):
        if not isinstance(self.team_id, str) or not self.team_id:
            raise ValidationError("team_id must be a nonempty string")
        for name in ("preseason", "season", "blended"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} rating must be finite")
        if _check_int("week", self.week) < 1:
            raise ValidationError("week must be >= 1")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "team_id": self.team_id,
            "preseason": self.preseason,
            "season": self.season,
            "blended": self.blended,
            "week": self.week,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TeamRating":
        _require_version(d)
        return cls(
            team_id=d["team_id"],
            preseason=d["preseason"],
            season=d["season"],
            blended=d["blended"],
            week=d["week"],
        )


@dataclass(frozen=True, eq=False)
class LeagueNetwork:
    """Directed win graph: edge loser -> winner weighted by point differential.

    Parallel games accumulate into a single summed edge weight.
    """

    teams: Tuple[str, ...]
    edges: Mapping[Tuple[str, str], float]

    def __post_init__(self):
        object.__setattr__(self, "teams", tuple(self.teams))
        team_set = set(self.teams)
        if len(team_set) != len(self.teams):
            raise ValidationError("duplicate team in network")
        edges = {}
        for (loser, winner), w in dict(self.edges).items():
            if loser == winner:
                raise ValidationError(f"self-loop on {loser!r}")
            if loser not in team_set or winner not in team_set:
                raise ValidationError(f"edge endpoint not in team set: {(loser, winner)}")
            w = float(w)
            if not math.isfinite(w) or w <= 0:
                raise ValidationError(f"edge weight must be positive and finite, got {w}")
            edges[(loser, winner)] = w
        object.__setattr__(self, "edges", MappingProxyType(edges))

    def __eq__(self, other):
        if not isinstance(other, LeagueNetwork):
            return NotImplemented
        return self.teams == other.teams and dict(self.edges) == dict(other.edges)

    def adjacency(self) -> np.ndarray:
        """A[i, j] = summed margin of j's wins over i (edge i -> j)."""
        index = {t: i for i, t in enumerate(self.teams)}
        a = np.zeros((len(self.teams), len(self.teams)))
        for (loser, winner), w in self.edges.items():
            a[index[loser], index[winner]] += w
        return a

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "teams": list(self.teams),
            "edges": [[loser, winner, w] for (loser, winner), w in sorted(self.edges.items())],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "LeagueNetwork":
        _require_version(d)
        return cls(
            teams=tuple(d["teams"]),
            edges={(loser, winner): w for loser, winner, w in d["edges"]},
        )


@dataclass(frozen=True)
class ReliabilityBin:
    """One occupied probability bin of a reliability curve."""

    lo: float
    hi: float
    mean_pred: float
    emp_freq: float
    count: int

    def __post_init__(self):
        if not self.lo <= self.mean_pred <= self.hi:
            raise ValidationError(f"bin mean {self.mean_pred} outside [{self.lo}, {self.hi}]")
        if not 0.0 <= self.emp_freq <= 1.0:
            raise ValidationError("empirical frequency must lie in [0, 1]")
        if _check_int("count", self.count) < 1:
            raise ValidationError("occupied bins must have positive count")


@dataclass(frozen=True)
class ReliabilityCurve:
    """Binned calibration summary; empty bins are omitted."""

    bins: Tuple[ReliabilityBin, ...]
    bin_width: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "bins", tuple(self.bins))
        if sum(b.count for b in self.bins) != self.n:
            raise ValidationError("bin counts must sum to the total sample count")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "bin_width": self.bin_width,
            "n": self.n,
            "bins": [
                {"lo": b.lo, "hi": b.hi, "mean_pred": b.mean_pred, "emp_freq": b.emp_freq, "count": b.count}
                for b in self.bins
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ReliabilityCurve":
        _require_version(d)
        return cls(
            bins=tuple(ReliabilityBin(**b) for b in d["bins"]),
            bin_width=d["bin_width"],
            n=d["n"],
        )


@dataclass(frozen=True)
class ReliabilityLine:
    """Count-weighted least-squares line through the reliability curve."""

    slope: float
    intercept: float
    r_squared: float
    slope_ci: Tuple[float, float]
    intercept_ci: Tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "slope_ci", tuple(float(v) for v in self.slope_ci))
        object.__setattr__(self, "intercept_ci", tuple(float(v) for v in self.intercept_ci))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "slope_ci": list(self.slope_ci),
            "intercept_ci": list(self.intercept_ci),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ReliabilityLine":
        _require_version(d)
        return cls(
            slope=d["slope"],
            intercept=d["intercept"],
            r_squared=d["r_squared"],
            slope_ci=tuple(d["slope_ci"]),
            intercept_ci=tuple(d["intercept_ci"]),
        )


@dataclass(frozen=True)
class EvalReport:
    """Accuracy and calibration summary for one dataset or time bucket."""

    accuracy: float
    brier: float
    brier_climatology: float
    reliability: Optional[ReliabilityLine]
    n: int

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValidationError("accuracy must lie in [0, 1]")
        if not 0.0 <= self.brier <= 1.0:
            raise ValidationError("brier must lie in [0, 1]")
        if not 0.0 <= self.brier_climatology <= 1.0:
            raise ValidationError("climatology brier must lie in [0, 1]")
        if _check_int("n", self.n) < 1:
            raise ValidationError("n must be positive")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "accuracy": self.accuracy,
            "brier": self.brier,
            "brier_climatology": self.brier_climatology,
            "reliability": None if self.reliability is None else self.reliability.to_dict(),
            "n": self.n,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "EvalReport":
        _require_version(d)
        rel = d["reliability"]
        return cls(
            accuracy=d["accuracy"],
            brier=d["brier"],
            brier_climatology=d["brier_climatology"],
            reliability=None if rel is None else ReliabilityLine.from_dict(rel),
            n=d["n"],
        )

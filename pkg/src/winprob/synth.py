"""Seeded synthetic-data generators.

These are the oracles behind the test suite: game states sampled from a
known logistic model, schedules sampled from the normal-margin rating
model, and perfectly calibrated prediction streams. They ship in the
library (not the tests) so the `selftest` CLI subcommand can exercise the
whole pipeline on any machine without real play-by-play data.
"""

from __future__ import annotations

import math
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from .core import N_FEATURES, GameState, PlayRecord, Possession
from .errors import ValidationError
from .features import featurize_matrix
from .ratings import Matchup
from .ingest import Dataset, Provenance

_POSSESSION_FLIP = 0.22
_POSSESSION_NEUTRAL = 0.02
_SCORE_EVENT = 0.055


def _walk_states(
    rng: np.random.Generator, n_plays: int, rating_diff: float
) -> Tuple[List[GameState], np.ndarray, np.ndarray]:
    """One game's states: clock and score evolve as a correlated walk.

    Also returns the two pre-snap score paths, which the play-log generator
    needs as separate columns.
    """
    total = rng.uniform(3350.0, 3580.0)
    dt = rng.uniform(18.0, 34.0, n_plays)
    t = np.floor(np.cumsum(dt) / dt.sum() * total).astype(int)
    t[0] = 0

    def score_path(points_prob: float) -> np.ndarray:
        events = rng.random(n_plays) < points_prob
        pts = np.where(rng.random(n_plays) < 0.45, 3, 7) * events
        path = np.concatenate([[0], np.cumsum(pts)[:-1]])  # scores are pre-snap
        return path.astype(int)

    home_score = score_path(_SCORE_EVENT)
    away_score = score_path(_SCORE_EVENT)

    poss = np.empty(n_plays, dtype=object)
    cur = Possession.HOME if rng.random() < 0.5 else Possession.AWAY
    for i in range(n_plays):
        r = rng.random()
        if r < _POSSESSION_NEUTRAL:
            poss[i] = Possession.NONE
            continue
        if r < _POSSESSION_NEUTRAL + _POSSESSION_FLIP:
            cur = Possession.AWAY if cur is Possession.HOME else Possession.HOME
        poss[i] = cur

    down = rng.choice([1, 2, 3, 4], size=n_plays, p=[0.42, 0.30, 0.18, 0.10])
    no_down = (rng.random(n_plays) < 0.10) | (poss == Possession.NONE)
    down[no_down] = 0
    ytg = np.clip(np.rint(rng.normal(8.5, 4.5, n_plays)), 1, 35).astype(int)
    ytg[no_down] = 0
    field = rng.integers(1, 100, n_plays)

    def timeout_path() -> np.ndarray:
        # teams do not always burn all three, which keeps the columns from
        # being deterministic functions of the clock
        n_used = int(rng.integers(0, 4))
        used_at = rng.uniform(0, total, n_used)
        return 3 - (used_at[None, :] < t[:, None]).sum(axis=1)

    home_to = timeout_path()
    away_to = timeout_path()
    share = rng.uniform(0.22, 0.78)
    hpt = np.clip(np.rint(t * share + rng.normal(0.0, 250.0, n_plays)), 0, t).astype(int)

    states = [
        GameState(
            time_elapsed_s=int(t[i]),
            score_diff=int(home_score[i] - away_score[i]),
            possession=poss[i],
            down=int(down[i]),
            yards_to_go=int(ytg[i]),
            field_position=int(field[i]),
            home_timeouts=int(home_to[i]),
            away_timeouts=int(away_to[i]),
            home_possession_time_s=int(hpt[i]),
            rating_diff=rating_diff,
        )
        for i in range(n_plays)
    ]
    return states, home_score, away_score


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -35.0, 35.0)))


def gen_glm_dataset(
    w_star: Sequence[float],
    b_star: float,
    n: int,
    seed: int,
    plays_per_game: int = 120,
) -> Dataset:
    """Dataset whose labels truly follow the logistic model (w*, b*).

    (w*, b*) act on the raw feature scale. States come from per-game
    correlated walks for realism, but each play draws its label
    independently from Bernoulli(p), so every play counts as its own game
    for label bookkeeping (a shared per-game label would not identify the
    coefficients).
    """
    w = np.asarray(w_star, dtype=float)
    if w.shape != (N_FEATURES,):
        raise ValidationError(f"w_star must have length {N_FEATURES}, got {w.shape}")
    if not math.isfinite(b_star):
        raise ValidationError("b_star must be finite")
    if n < 1:
        raise ValidationError("n must be positive")
    rng = np.random.default_rng(seed)
    states: List[GameState] = []
    while len(states) < n:
        rating_diff = float(np.clip(rng.normal(0.0, 4.0), -15.0, 15.0))
        take = min(plays_per_game, n - len(states))
        walk, _, _ = _walk_states(rng, take, rating_diff)
        states.extend(walk)
    x_raw = featurize_matrix(states)
    p = _sigmoid(b_star + x_raw @ w)
    labels = (rng.random(n) < p).astype(int)
    return Dataset(
        pairs=tuple((s, int(y)) for s, y in zip(states, labels)),
        game_ids=tuple(f"s{i:07d}" for i in range(n)),
        provenance=Provenance(source="synthetic:glm", games=n, plays=n),
    )


def gen_schedule(
    h_star: float,
    r_star: Mapping[str, float],
    noise_sd: float,
    seed: int,
    rounds: int = 1,
    season: int = 2024,
) -> List[Matchup]:
    """Home-and-home round-robin with margins Normal(h + R_i - R_j, sd).

    The supplied ratings are recentered to sum to zero; noise_sd = 0 gives
    the exact model margins, so the least-squares fit recovers (h*, R*).
    """
    if len(r_star) < 2:
        raise ValidationError("need at least two teams")
    if noise_sd < 0:
        raise ValidationError("noise_sd must be nonnegative")
    teams = sorted(r_star)
    r = {t: float(r_star[t]) for t in teams}
    center = sum(r.values()) / len(r)
    r = {t: v - center for t, v in r.items()}
    rng = np.random.default_rng(seed)
    out: List[Matchup] = []
    for rnd in range(rounds):
        for home in teams:
            for away in teams:
                if home == away:
                    continue
                margin = h_star + r[home] - r[away]
                if noise_sd > 0:
                    margin += rng.normal(0.0, noise_sd)
                out.append(Matchup(home=home, away=away, margin=float(margin), season=season, week=rnd + 1))
    return out


def gen_calibrated_preds(n: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Uniform predictions with labels drawn Bernoulli(pred): perfectly
    calibrated by construction."""
    if n < 1:
        raise ValidationError("n must be positive")
    rng = np.random.default_rng(seed)
    preds = rng.random(n)
    labels = (rng.random(n) < preds).astype(int)
    return preds, labels


def gen_play_records(
    n_games: int,
    seed: int,
    plays_per_game: int = 90,
    season: int = 2024,
) -> Tuple[List[PlayRecord], Dict[str, float]]:
    """Raw play rows for exercising the CSV pipeline end to end.

    Returns the plays plus the per-game rating differential map consumed by
    the `game_id,rating_diff` ratings file. The final row of every game
    shows an unequal scoreline, so no generated game trips the tie filter,
    and home_won matches that final scoreline.
    """
    if n_games < 1 or plays_per_game < 2:
        raise ValidationError("need at least one game of at least two plays")
    rng = np.random.default_rng(seed)
    plays: List[PlayRecord] = []
    diffs: Dict[str, float] = {}
    for g in range(n_games):
        game_id = f"g{g:04d}"
        week = g % 17 + 1
        rating_diff = float(np.clip(rng.normal(0.0, 4.0), -15.0, 15.0))
        diffs[game_id] = rating_diff
        states, home_path, away_path = _walk_states(rng, plays_per_game, rating_diff)
        home_path = home_path.copy()
        if home_path[-1] == away_path[-1]:
            home_path[-1] += 3  # a late field goal keeps the log tie-free
        home_won = 1 if home_path[-1] > away_path[-1] else 0
        for s, hs, as_ in zip(states, home_path, away_path):
            quarter = min(s.time_elapsed_s // 900, 3) + 1
            clock = 900 - (s.time_elapsed_s - (quarter - 1) * 900)
            plays.append(
                PlayRecord(
                    game_id=game_id,
                    season=season,
                    week=week,
                    quarter=int(quarter),
                    clock_remaining_s=int(clock),
                    possession=s.possession,
                    down=s.down,
                    yards_to_go=s.yards_to_go,
                    field_position=s.field_position,
                    home_score=int(hs),
                    away_score=int(as_),
                    home_timeouts=s.home_timeouts,
                    away_timeouts=s.away_timeouts,
                    home_possession_time_s=s.home_possession_time_s,
                    home_won=home_won,
                )
            )
    return plays, diffs

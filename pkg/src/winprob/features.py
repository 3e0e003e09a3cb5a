"""Design-row construction and z-score standardization.

Interactions are formed on raw features first; every column, interactions
included, is then z-scored with training-set moments. The time_elapsed
column enters as a fraction of regulation (t / 3600) so its products stay
on a comparable scale before standardization.
"""

from __future__ import annotations

from typing import Iterable, List, Sequence

import numpy as np

from .core import (
    FEATURE_NAMES,
    N_FEATURES,
    REGULATION_S,
    FeatureVector,
    GameState,
    Possession,
    StandardizationStats,
)
from .errors import ConstantColumnError

_IDX = {name: i for i, name in enumerate(FEATURE_NAMES)}


def featurize(state: GameState) -> FeatureVector:
    """Map a GameState to the raw 21-column design row."""
    return FeatureVector(values=_featurize_values(state))


def _featurize_values(state: GameState) -> np.ndarray:
    v = np.zeros(N_FEATURES)
    poss_home = 1.0 if state.possession is Possession.HOME else 0.0
    time_frac = state.time_elapsed_s / REGULATION_S
    v[_IDX["poss_home"]] = poss_home
    v[_IDX["score_diff"]] = state.score_diff
    v[_IDX["home_timeouts"]] = state.home_timeouts
    v[_IDX["away_timeouts"]] = state.away_timeouts
    v[_IDX["home_possession_time"]] = state.home_possession_time_s
    v[_IDX["time_elapsed"]] = time_frac
    v[_IDX["rating_diff"]] = state.rating_diff
    if state.down > 0:
        v[_IDX["down_1"] + state.down - 1] = 1.0
        v[_IDX["poss_home_x_down_1"] + state.down - 1] = poss_home
    v[_IDX["field_position"]] = state.field_position
    v[_IDX["yards_to_go"]] = state.yards_to_go
    v[_IDX["poss_home_x_field_position"]] = poss_home * state.field_position
    v[_IDX["poss_home_x_yards_to_go"]] = poss_home * state.yards_to_go
    v[_IDX["time_elapsed_x_rating_diff"]] = time_frac * state.rating_diff
    v[_IDX["time_elapsed_x_score_diff"]] = time_frac * state.score_diff
    return v


def featurize_matrix(states: Sequence[GameState]) -> np.ndarray:
    """Raw design matrix, one row per state."""
    out = np.empty((len(states), N_FEATURES))
    for i, s in enumerate(states):
        out[i] = _featurize_values(s)
    return out


def fit_standardizer(rows: Iterable[FeatureVector] | np.ndarray) -> StandardizationStats:
    """Per-column sample mean and standard deviation (N-1 divisor).

    Raises ConstantColumnError naming the offending column when any column
    has zero variance, and ValueError on fewer than two rows.
    """
    x = _as_matrix(rows)
    if x.shape[0] < 2:
        raise ValueError(f"need at least 2 rows to standardize, got {x.shape[0]}")
    mean = x.mean(axis=0)
    sd = x.std(axis=0, ddof=1)
    constant = np.nonzero(sd == 0)[0]
    if constant.size:
        names = [FEATURE_NAMES[i] for i in constant]
        raise ConstantColumnError(f"constant columns cannot be standardized: {names}")
    return StandardizationStats(mean=mean, sd=sd)


def standardize(v: FeatureVector, stats: StandardizationStats) -> FeatureVector:
    """Replace each column by (x - mean) / sd."""
    return FeatureVector(values=(v.values - stats.mean) / stats.sd)


def unstandardize(v: FeatureVector, stats: StandardizationStats) -> FeatureVector:
    """Inverse of standardize."""
    return FeatureVector(values=v.values * stats.sd + stats.mean)


def standardize_matrix(x: np.ndarray, stats: StandardizationStats) -> np.ndarray:
    return (np.asarray(x, dtype=np.float64) - stats.mean) / stats.sd


def _as_matrix(rows) -> np.ndarray:
    if isinstance(rows, np.ndarray):
        x = np.asarray(rows, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != N_FEATURES:
            raise ValueError(f"expected (n, {N_FEATURES}) matrix, got shape {x.shape}")
        return x
    vecs: List[FeatureVector] = list(rows)
    return np.array([v.values for v in vecs], dtype=np.float64)

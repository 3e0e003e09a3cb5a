"""In-game win probability for American football.

The pipeline: parse play-by-play CSVs into GameStates, map them onto the
21-column feature layout, train a logistic GLM (or naive Bayes, or a small
feedforward network), calibrate scores if desired, and evaluate accuracy
and probability calibration. Team-strength ratings feed the pregame
differential feature and can also be derived from the win network via
PageRank.
"""

from .core import (
    FEATURE_NAMES,
    N_FEATURES,
    EvalReport,
    FeatureVector,
    GameState,
    GlmModel,
    LeagueNetwork,
    PlattParams,
    PlayRecord,
    Possession,
    ReliabilityBin,
    ReliabilityCurve,
    ReliabilityLine,
    StandardizationStats,
    TeamRating,
    TrainingMeta,
    canonical_json,
    state_from_play,
    time_elapsed_from_clock,
)
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
from .evaluation import (
    TimeBucket,
    accuracy,
    brier,
    climatology_brier,
    drive_linearity_r2,
    evaluate,
    evaluate_predictions,
    fit_reliability_line,
    reliability_curve,
    time_bucketed_eval,
)
from .features import (
    featurize,
    featurize_matrix,
    fit_standardizer,
    standardize,
    standardize_matrix,
    unstandardize,
)
from .ingest import (
    PLAYS_CSV_HEADER,
    Dataset,
    Provenance,
    RowError,
    build_dataset,
    load_dataset,
    parse_play_log,
    split_dataset,
    write_play_log,
)
from .models import (
    FnnModel,
    NaiveBayesModel,
    TrainConfig,
    apply_platt,
    fit_platt,
    fnn_gradients,
    fnn_loss,
    load_model,
    predict,
    predict_states,
    save_model,
    train_fnn,
    train_glm,
    train_nb,
)
from .ratings import (
    PRESEASON_FADE_WEEKS,
    SIGMA_POINTS,
    ConstantRatingBook,
    Matchup,
    PreseasonFit,
    RatingBook,
    SeasonFit,
    WinTotalLine,
    blend_ratings,
    blend_table,
    build_league_network,
    expected_wins,
    fit_preseason_ratings,
    fit_season_ratings,
    gamma_blend,
    load_matchups_csv,
    load_ratings_csv,
    load_win_totals_csv,
    pagerank_power_iteration,
    pagerank_ratings,
    rating_book_from_files,
    std_normal_cdf,
    win_prob_from_ratings,
    write_ratings_csv,
)
from .synth import gen_calibrated_preds, gen_glm_dataset, gen_play_records, gen_schedule

__version__ = "0.1.0"

__all__ = [
    "FEATURE_NAMES",
    "N_FEATURES",
    "PLAYS_CSV_HEADER",
    "PRESEASON_FADE_WEEKS",
    "SIGMA_POINTS",
    "ConstantColumnError",
    "ConstantRatingBook",
    "ConvergenceError",
    "CsvFormatError",
    "Dataset",
    "EvalReport",
    "FeatureVector",
    "FnnModel",
    "GameState",
    "GlmModel",
    "LeagueNetwork",
    "Matchup",
    "ModelFormatError",
    "NaiveBayesModel",
    "PlattParams",
    "PlayRecord",
    "Possession",
    "PreseasonFit",
    "Provenance",
    "RatingBook",
    "RatingLookupError",
    "ReliabilityBin",
    "ReliabilityCurve",
    "ReliabilityLine",
    "RowError",
    "SchemaError",
    "SeasonFit",
    "SingularScheduleError",
    "StandardizationStats",
    "TeamRating",
    "TimeBucket",
    "TrainConfig",
    "TrainingMeta",
    "ValidationError",
    "WinTotalLine",
    "WinprobError",
    "accuracy",
    "apply_platt",
    "blend_ratings",
    "blend_table",
    "brier",
    "build_dataset",
    "build_league_network",
    "canonical_json",
    "climatology_brier",
    "drive_linearity_r2",
    "evaluate",
    "evaluate_predictions",
    "expected_wins",
    "featurize",
    "featurize_matrix",
    "fit_platt",
    "fit_preseason_ratings",
    "fit_reliability_line",
    "fit_season_ratings",
    "fit_standardizer",
    "fnn_gradients",
    "fnn_loss",
    "gamma_blend",
    "gen_calibrated_preds",
    "gen_glm_dataset",
    "gen_play_records",
    "gen_schedule",
    "load_dataset",
    "load_matchups_csv",
    "load_model",
    "load_ratings_csv",
    "load_win_totals_csv",
    "pagerank_power_iteration",
    "pagerank_ratings",
    "parse_play_log",
    "predict",
    "predict_states",
    "rating_book_from_files",
    "reliability_curve",
    "save_model",
    "split_dataset",
    "standardize",
    "standardize_matrix",
    "state_from_play",
    "std_normal_cdf",
    "time_bucketed_eval",
    "time_elapsed_from_clock",
    "train_fnn",
    "train_glm",
    "train_nb",
    "unstandardize",
    "win_prob_from_ratings",
    "write_play_log",
    "write_ratings_csv",
]

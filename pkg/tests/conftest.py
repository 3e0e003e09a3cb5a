"""Shared fixtures and the acceptance-line reporter.

Acceptance tests register one (number, name, ok, detail) tuple each; the
terminal summary prints them as single pass/fail lines at the end of the
run so the criterion outcomes are visible even when pytest captures
stdout.
"""

import numpy as np
import pytest

from winprob import (
    ConstantRatingBook,
    GameState,
    Possession,
    TrainConfig,
    featurize_matrix,
    fit_standardizer,
    gen_glm_dataset,
    standardize_matrix,
    train_glm,
)

_ACCEPTANCE_RESULTS = []


def record_criterion(number: int, name: str, ok: bool, detail: str) -> None:
    _ACCEPTANCE_RESULTS.append((number, name, ok, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number, name, ok, detail in sorted(_ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2} [{status}] {name}: {detail}")


def random_states(n: int, seed: int):
    """n independent valid GameStates drawn uniformly over the field ranges.

    Unlike the synth walks these have no within-game correlation, which is
    what invariant tests usually want.
    """
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(n):
        down = int(rng.integers(0, 5))
        ytg = 0 if down == 0 else int(rng.integers(1, 100))
        states.append(
            GameState(
                time_elapsed_s=int(rng.integers(0, 4200)),
                score_diff=int(rng.integers(-40, 41)),
                possession=Possession(rng.choice(["H", "A", "N"])),
                down=down,
                yards_to_go=ytg,
                field_position=int(rng.integers(0, 101)),
                home_timeouts=int(rng.integers(0, 4)),
                away_timeouts=int(rng.integers(0, 4)),
                home_possession_time_s=int(rng.integers(0, 3600)),
                rating_diff=float(rng.normal(0.0, 5.0)),
            )
        )
    return states


def example_state(**overrides) -> GameState:
    base = dict(
        time_elapsed_s=1800,
        score_diff=3,
        possession=Possession.HOME,
        down=2,
        yards_to_go=7,
        field_position=35,
        home_timeouts=2,
        away_timeouts=3,
        home_possession_time_s=900,
        rating_diff=1.5,
    )
    base.update(overrides)
    return GameState(**base)


#: Raw-scale generating coefficients reused across model and harness tests.
#: Indices follow FEATURE_NAMES; values chosen so every column matters but
#: predictions stay well away from saturation.
W_STAR = np.array(
    [
        0.35,  # poss_home
        0.12,  # score_diff
        0.06,  # home_timeouts
        -0.06,  # away_timeouts
        0.0002,  # home_possession_time (seconds scale)
        0.25,  # time_elapsed (fraction scale)
        0.05,  # rating_diff
        0.12,  # down_1
        0.04,  # down_2
        -0.08,  # down_3
        -0.18,  # down_4
        0.003,  # field_position
        -0.015,  # yards_to_go
        0.10,  # poss_home x down_1
        0.05,  # poss_home x down_2
        -0.05,  # poss_home x down_3
        -0.12,  # poss_home x down_4
        0.004,  # poss_home x field_position
        -0.02,  # poss_home x yards_to_go
        0.03,  # time_elapsed x rating_diff
        0.04,  # time_elapsed x score_diff
    ]
)
B_STAR = 0.05


@pytest.fixture(scope="session")
def small_glm_model():
    """A GLM trained on 6k synthetic rows; shared by eval/CLI/service tests."""
    ds = gen_glm_dataset(W_STAR, B_STAR, 6_000, seed=42)
    x = featurize_matrix(ds.states())
    stats = fit_standardizer(x)
    model = train_glm(standardize_matrix(x, stats), ds.labels(), TrainConfig(seed=42), stats)
    return model


@pytest.fixture(scope="session")
def constant_book():
    return ConstantRatingBook(0.0)

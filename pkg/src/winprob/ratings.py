"""Team strength: season/preseason rating solvers, blending, and PageRank.

Season ratings come from an equality-constrained least-squares fit of game
margins; preseason ratings are fitted to win-total lines through the
normal-margin win-probability link. Both keep the team ratings summing to
zero. A weighted-digraph PageRank offers a network-based alternative.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .core import TeamRating
from .errors import (
    ConvergenceError,
    CsvFormatError,
    RatingLookupError,
    SingularScheduleError,
    ValidationError,
)

#: Standard deviation of game margins about the expected margin, in points.
SIGMA_POINTS = 14.0

#: Weeks over which the preseason rating fades to zero influence.
PRESEASON_FADE_WEEKS = 10

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Matchup:
    """One completed game: home team, visitor, and the home point margin."""

    home: str
    away: str
    margin: float
    season: int
    week: int

    def __post_init__(self):
        if self.home == self.away:
            raise ValidationError(f"teams must be distinct, got {self.home!r} twice")
        if not math.isfinite(self.margin):
            raise ValidationError("margin must be finite")


@dataclass(frozen=True)
class WinTotalLine:
    """Market expectation of a team's season win count."""

    team: str
    lam: float

    def __post_init__(self):
        if not math.isfinite(self.lam) or self.lam < 0:
            raise ValidationError(f"expected wins must be finite and nonnegative, got {self.lam}")


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF via the libm complementary error function.

    Phi(x) = erfc(-x / sqrt(2)) / 2. erfc is correctly rounded to double
    precision, so the absolute error is ~1e-16, far below the 1e-7 budget;
    Phi(0) is exactly 0.5.
    """
    return 0.5 * math.erfc(-x / _SQRT2)


def win_prob_from_ratings(h: float, r_home: float, r_away: float, sigma: float = SIGMA_POINTS) -> float:
    """Pregame home win probability Phi((h + r_home - r_away) / sigma)."""
    return std_normal_cdf((h + r_home - r_away) / sigma)


def gamma_blend(week: int) -> float:
    """Preseason weight max(1 - (week - 1) / 10, 0)."""
    if week < 1:
        raise ValidationError(f"week must be >= 1, got {week}")
    return max(1.0 - (week - 1) / PRESEASON_FADE_WEEKS, 0.0)


def blend_ratings(preseason: float, season: float, week: int) -> float:
    """gamma * preseason + (1 - gamma) * season, gamma per gamma_blend."""
    g = gamma_blend(week)
    return g * preseason + (1.0 - g) * season


def blend_table(preseason: Mapping[str, float], season: Mapping[str, float], week: int) -> List[TeamRating]:
    """Blend two rating maps into TeamRating rows (teams must match)."""
    if set(preseason) != set(season):
        raise ValidationError("preseason and season tables cover different teams")
    return [
        TeamRating(
            team_id=t,
            preseason=float(preseason[t]),
            season=float(season[t]),
            blended=blend_ratings(float(preseason[t]), float(season[t]), week),
            week=week,
        )
        for t in sorted(preseason)
    ]


@dataclass(frozen=True)
class SeasonFit:
    """Result of the margin least-squares fit."""

    home_edge: float
    ratings: Mapping[str, float]
    rss: float
    ridge_used: float


def fit_season_ratings(matchups: Sequence[Matchup], ridge: float = 1e-8) -> SeasonFit:
    """Fit home edge and sum-zero team ratings to observed margins.

    Minimizes sum_m (margin_m - (h + R_home - R_away))^2 subject to
    sum_i R_i = 0, solved exactly through the bordered normal equations.
    The ridge penalty ridge * ||R||^2 is applied only when the constrained
    system is rank-deficient (disconnected early-season schedules); asking
    for ridge=0 on such a schedule raises SingularScheduleError.
    """
    if not matchups:
        raise ValidationError("need at least one matchup")
    if ridge < 0:
        raise ValidationError("ridge must be nonnegative")
    teams = sorted({m.home for m in matchups} | {m.away for m in matchups})
    index = {t: i for i, t in enumerate(teams)}
    n_teams = len(teams)
    n_unknowns = n_teams + 1  # h first, then ratings

    x = np.zeros((len(matchups), n_unknowns))
    mu = np.empty(len(matchups))
    for row, m in enumerate(matchups):
        x[row, 0] = 1.0
        x[row, 1 + index[m.home]] = 1.0
        x[row, 1 + index[m.away]] = -1.0
        mu[row] = m.margin

    gram = x.T @ x
    rhs = x.T @ mu
    constraint = np.zeros(n_unknowns)
    constraint[1:] = 1.0

    def bordered(eps: float) -> np.ndarray:
        k = np.zeros((n_unknowns + 1, n_unknowns + 1))
        k[:n_unknowns, :n_unknowns] = gram
        if eps:
            k[range(1, n_unknowns), range(1, n_unknowns)] += eps
        k[:n_unknowns, -1] = constraint
        k[-1, :n_unknowns] = constraint
        return k

    k0 = bordered(0.0)
    full_rank = np.linalg.matrix_rank(k0) == n_unknowns + 1
    if full_rank:
        ridge_used = 0.0
        system = k0
    elif ridge > 0:
        ridge_used = ridge
        system = bordered(ridge)
    else:
        raise SingularScheduleError(
            "schedule is rank-deficient (disconnected components) and ridge=0 was requested"
        )

    b = np.concatenate([rhs, [0.0]])
    solution = np.linalg.solve(system, b)
    h = float(solution[0])
    r = solution[1 : n_unknowns]
    r = r - r.mean()  # remove residual constraint drift
    rss = float(np.sum((mu - x[:, 0] * h - x[:, 1:] @ r) ** 2))
    return SeasonFit(
        home_edge=h,
        ratings={t: float(r[index[t]]) for t in teams},
        rss=rss,
        ridge_used=ridge_used,
    )


def expected_wins(
    team: str,
    schedule: Sequence[Tuple[str, str]],
    h: float,
    ratings: Mapping[str, float],
    sigma: float = SIGMA_POINTS,
) -> float:
    """Sum of pregame win probabilities over the team's (home, away) games.

    The home edge enters with +h when the team hosts and -h when it visits;
    games not involving the team are ignored; an empty schedule gives 0.
    """
    total = 0.0
    for home, away in schedule:
        if team == home:
            total += win_prob_from_ratings(h, ratings[home], ratings[away], sigma)
        elif team == away:
            total += 1.0 - win_prob_from_ratings(h, ratings[home], ratings[away], sigma)
    return total


def _phi_vec(z: np.ndarray) -> np.ndarray:
    # vectorized Phi with the same erfc formula as std_normal_cdf
    from scipy.special import erfc

    return 0.5 * erfc(-z / _SQRT2)


_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class PreseasonFit:
    """Result of the win-total preseason fit."""

    home_edge: float
    ratings: Mapping[str, float]
    objective: float
    grad_norm: float
    iterations: int
    start_index: int
    objective_history: Tuple[float, ...]


def fit_preseason_ratings(
    lines: Sequence[WinTotalLine],
    schedule: Sequence[Tuple[str, str]],
    sigma: float = SIGMA_POINTS,
    tol: float = 1e-8,
    max_iter: int = 10_000,
    n_starts: int = 5,
    seed: int = 0,
) -> PreseasonFit:
    """Fit (home edge, sum-zero preseason ratings) to win-total lines.

    Minimizes sum_i (lambda_i - E[W_i])^2 subject to sum rho = 0 by
    projected gradient descent: Barzilai-Borwein initial step, Armijo
    backtracking (so the objective never increases across accepted steps),
    and projection of the rating block onto the sum-zero hyperplane.
    Runs n_starts seeded starts and keeps the best; raises ConvergenceError
    when no start reaches the gradient tolerance.

    Different (h, rho) can produce identical expected wins on balanced
    schedules, so only E[W] recovery is guaranteed, not the parameters.
    """
    teams = sorted({line.team for line in lines})
    if len(teams) != len(lines):
        raise ValidationError("duplicate team in win-total lines")
    if not len(schedule):
        raise ValidationError("schedule must contain at least one game")
    index = {t: i for i, t in enumerate(teams)}
    n_teams = len(teams)
    for home, away in schedule:
        if home not in index or away not in index:
            raise ValidationError(f"schedule team without a win-total line: {(home, away)}")
    games_per_team = np.zeros(n_teams)
    home_idx = np.array([index[h] for h, _ in schedule], dtype=int)
    away_idx = np.array([index[a] for _, a in schedule], dtype=int)
    np.add.at(games_per_team, home_idx, 1)
    np.add.at(games_per_team, away_idx, 1)
    lam = np.empty(n_teams)
    for line in lines:
        lam[index[line.team]] = line.lam
        if line.lam > games_per_team[index[line.team]]:
            raise ValidationError(
                f"win total {line.lam} for {line.team!r} exceeds its {int(games_per_team[index[line.team]])} scheduled games"
            )

    def objective_and_grad(theta: np.ndarray) -> Tuple[float, np.ndarray]:
        h, rho = theta[0], theta[1:]
        z = (h + rho[home_idx] - rho[away_idx]) / sigma
        p = _phi_vec(z)
        ew = np.zeros(n_teams)
        np.add.at(ew, home_idx, p)
        np.add.at(ew, away_idx, 1.0 - p)
        resid = ew - lam
        # d p_g / d h = pdf(z_g) / sigma; home and away rows get +/- p_g
        pdf = _INV_SQRT_2PI * np.exp(-0.5 * z * z) / sigma
        per_game = 2.0 * pdf * (resid[home_idx] - resid[away_idx])
        grad = np.zeros(n_teams + 1)
        grad[0] = per_game.sum()
        np.add.at(grad, 1 + home_idx, per_game)
        np.add.at(grad, 1 + away_idx, -per_game)
        grad[1:] -= grad[1:].mean()  # project onto the sum-zero hyperplane
        return float(resid @ resid), grad

    rng = np.random.default_rng(seed)
    best: Optional[PreseasonFit] = None
    converged = False
    for start in range(n_starts):
        theta = np.zeros(n_teams + 1)
        if start > 0:
            theta[0] = rng.uniform(-3.0, 3.0)
            rho0 = rng.normal(0.0, 3.0, size=n_teams)
            theta[1:] = rho0 - rho0.mean()
        f, g = objective_and_grad(theta)
        history = [f]
        step = 1.0
        prev_theta = prev_grad = None
        it = 0
        for it in range(1, max_iter + 1):
            gnorm = float(np.linalg.norm(g))
            if gnorm < tol:
                break
            if prev_theta is not None:
                s = theta - prev_theta
                y = g - prev_grad
                sy = float(s @ y)
                if sy > 1e-300:
                    step = float(s @ s) / sy
            step = min(max(step, 1e-12), 1e8)
            alpha = step
            accepted = False
            for _ in range(60):
                cand = theta - alpha * g
                cand[1:] -= cand[1:].mean()
                f_cand, g_cand = objective_and_grad(cand)
                if f_cand <= f - 1e-4 * alpha * gnorm * gnorm:
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                break
            prev_theta, prev_grad = theta, g
            theta, f, g = cand, f_cand, g_cand
            history.append(f)
        gnorm = float(np.linalg.norm(g))
        fit = PreseasonFit(
            home_edge=float(theta[0]),
            ratings={t: float(theta[1 + index[t]]) for t in teams},
            objective=f,
            grad_norm=gnorm,
            iterations=it,
            start_index=start,
            objective_history=tuple(history),
        )
        if best is None or fit.objective < best.objective:
            best = fit
        if gnorm < tol:
            converged = True
    if not converged:
        raise ConvergenceError(
            f"preseason fit did not converge in {n_starts} starts; "
            f"best objective {best.objective:.3e}, gradient norm {best.grad_norm:.3e}"
        )
    return best


def build_league_network(matchups: Sequence[Matchup]):
    """Directed win graph: edge loser -> winner, weight = point differential.

    Ties contribute no edge; repeat pairings accumulate by summing weights.
    """
    from .core import LeagueNetwork

    teams = sorted({m.home for m in matchups} | {m.away for m in matchups})
    edges: Dict[Tuple[str, str], float] = {}
    for m in matchups:
        if m.margin > 0:
            key, w = (m.away, m.home), float(m.margin)
        elif m.margin < 0:
            key, w = (m.home, m.away), float(-m.margin)
        else:
            continue
        edges[key] = edges.get(key, 0.0) + w
    return LeagueNetwork(teams=teams, edges=edges)


def _transition(net) -> Tuple[np.ndarray, List[str]]:
    a = net.adjacency()
    d = np.maximum(1.0, a.sum(axis=1))
    return a / d[:, None], list(net.teams)


def pagerank_ratings(net, alpha: float = 0.85, beta: Optional[Mapping[str, float]] = None) -> Dict[str, float]:
    """Personalized PageRank of the league network, exact dense solve.

    With edges loser -> winner, scores flow from losers to winners:
    pi = alpha * P^T pi + beta, where P is the adjacency row-normalized by
    the weighted out-strength max(1, sum_j A[i, j]). Solved by LU; the
    system is strictly diagonally dominant for alpha < 1, hence never
    singular.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    p, teams = _transition(net)
    n = len(teams)
    b = _beta_vector(beta, teams)
    pi = np.linalg.solve(np.eye(n) - alpha * p.T, b)
    if not np.all(np.isfinite(pi)):
        raise SingularScheduleError("PageRank solve produced non-finite scores")
    return {t: float(pi[i]) for i, t in enumerate(teams)}


def pagerank_power_iteration(
    net,
    alpha: float = 0.85,
    beta: Optional[Mapping[str, float]] = None,
    tol: float = 1e-13,
    max_iter: int = 200_000,
) -> Dict[str, float]:
    """Iterative fixed point pi <- alpha * P^T pi + beta.

    Converges geometrically for alpha < 1; kept as an independent check on
    the exact solver.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    p, teams = _transition(net)
    b = _beta_vector(beta, teams)
    pi = b.copy()
    for _ in range(max_iter):
        nxt = alpha * (p.T @ pi) + b
        if np.max(np.abs(nxt - pi)) < tol:
            pi = nxt
            break
        pi = nxt
    return {t: float(pi[i]) for i, t in enumerate(teams)}


def _beta_vector(beta: Optional[Mapping[str, float]], teams: List[str]) -> np.ndarray:
    if beta is None:
        return np.full(len(teams), 1.0 / len(teams))
    missing = [t for t in teams if t not in beta]
    if missing:
        raise ValidationError(f"beta missing teams: {missing}")
    b = np.array([float(beta[t]) for t in teams])
    if not np.all(np.isfinite(b)):
        raise ValidationError("beta must be finite")
    return b


# ---------------------------------------------------------------------------
# Rating lookup used by state construction, plus the CSV surfaces.


class RatingBook:
    """Resolves a play's rating differential h + R~_home - R~_away.

    Two sources, checked in order: a direct per-game differential map, then
    a game registry joined against a (week, team) blended-rating table with
    the book's home edge. A book covers a single season's table.
    """

    def __init__(
        self,
        home_edge: float = 0.0,
        blended: Optional[Mapping[Tuple[int, str], float]] = None,
        games: Optional[Mapping[str, Tuple[str, str]]] = None,
        game_diffs: Optional[Mapping[str, float]] = None,
    ):
        self.home_edge = float(home_edge)
        self.blended = dict(blended or {})
        self.games = dict(games or {})
        self.game_diffs = dict(game_diffs or {})

    def rating_diff_for(self, game_id: str, season: int, week: int) -> float:
        if game_id in self.game_diffs:
            return self.game_diffs[game_id]
        if game_id not in self.games:
            raise RatingLookupError(
                f"game {game_id!r} has neither a direct rating_diff nor a registry entry"
            )
        home, away = self.games[game_id]
        values = []
        for team in (home, away):
            key = (week, team)
            if key not in self.blended:
                raise RatingLookupError(f"no rating for team {team!r} at week {week}")
            values.append(self.blended[key])
        return self.home_edge + values[0] - values[1]


class ConstantRatingBook:
    """Every game gets the same differential; handy for tests and demos."""

    def __init__(self, rating_diff: float = 0.0):
        self.rating_diff = float(rating_diff)

    def rating_diff_for(self, game_id: str, season: int, week: int) -> float:
        return self.rating_diff


RATINGS_CSV_HEADER = ["team", "rho", "season_r", "blended_r", "week"]
MATCHUPS_CSV_HEADER = ["season", "week", "home", "away", "home_margin"]
WIN_TOTALS_CSV_HEADER = ["team", "lambda"]
GAMES_CSV_HEADER = ["game_id", "season", "week", "home", "away"]
GAME_RATINGS_CSV_HEADER = ["game_id", "rating_diff"]


def write_ratings_csv(path, table: Sequence[TeamRating], home_edge: Optional[float] = None) -> None:
    """Write `team,rho,season_r,blended_r,week` rows.

    The matchup-level home edge has no team row, so it rides along as a
    leading `# home_edge=<value>` comment the loader understands.
    """
    with open(path, "w", newline="") as fh:
        if home_edge is not None:
            fh.write(f"# home_edge={home_edge!r}\n")
        writer = csv.writer(fh)
        writer.writerow(RATINGS_CSV_HEADER)
        for row in table:
            writer.writerow([row.team_id, repr(row.preseason), repr(row.season), repr(row.blended), row.week])


def load_ratings_csv(path) -> Tuple[List[TeamRating], float]:
    """Parse write_ratings_csv output; returns (rows, home_edge)."""
    home_edge = 0.0
    with open(path, newline="") as fh:
        first = fh.readline()
        if first.startswith("# home_edge="):
            home_edge = float(first.split("=", 1)[1])
            rows = list(csv.reader(fh))
        else:
            rows = list(csv.reader([first] + fh.readlines()))
    if not rows or rows[0] != RATINGS_CSV_HEADER:
        raise CsvFormatError(f"expected header {','.join(RATINGS_CSV_HEADER)!r} in {path}")
    table = []
    for r in rows[1:]:
        if not r:
            continue
        team, rho, season_r, blended_r, week = r
        table.append(
            TeamRating(
                team_id=team,
                preseason=float(rho),
                season=float(season_r),
                blended=float(blended_r),
                week=int(week),
            )
        )
    return table, home_edge


def _read_csv_rows(path, header: List[str]) -> List[List[str]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != header:
        raise CsvFormatError(f"expected header {','.join(header)!r} in {path}")
    return [r for r in rows[1:] if r]


def load_matchups_csv(path) -> List[Matchup]:
    return [
        Matchup(home=h, away=a, margin=float(m), season=int(s), week=int(w))
        for s, w, h, a, m in _read_csv_rows(path, MATCHUPS_CSV_HEADER)
    ]


def load_win_totals_csv(path) -> List[WinTotalLine]:
    return [WinTotalLine(team=t, lam=float(v)) for t, v in _read_csv_rows(path, WIN_TOTALS_CSV_HEADER)]


def load_games_csv(path) -> Dict[str, Tuple[str, str]]:
    games: Dict[str, Tuple[str, str]] = {}
    for gid, _season, _week, home, away in _read_csv_rows(path, GAMES_CSV_HEADER):
        games[gid] = (home, away)
    return games


def load_game_ratings_csv(path) -> Dict[str, float]:
    return {gid: float(v) for gid, v in _read_csv_rows(path, GAME_RATINGS_CSV_HEADER)}


def rating_book_from_files(
    ratings_path=None,
    games_path=None,
    game_ratings_path=None,
    week: Optional[int] = None,
) -> RatingBook:
    """Assemble a RatingBook from the CSV surfaces.

    `ratings_path` may point at either the team-level ratings schema or the
    per-game `game_id,rating_diff` schema; the header decides.
    """
    book = RatingBook()
    if ratings_path is not None:
        with open(ratings_path, newline="") as fh:
            first = fh.readline().strip()
        if first.startswith("# home_edge=") or first == ",".join(RATINGS_CSV_HEADER):
            table, home_edge = load_ratings_csv(ratings_path)
            book.home_edge = home_edge
            book.blended = {(row.week, row.team_id): row.blended for row in table}
        elif first == ",".join(GAME_RATINGS_CSV_HEADER):
            book.game_diffs = load_game_ratings_csv(ratings_path)
        else:
            raise CsvFormatError(
                f"unrecognized ratings header {first!r}; expected "
                f"{','.join(RATINGS_CSV_HEADER)!r} or {','.join(GAME_RATINGS_CSV_HEADER)!r}"
            )
    if games_path is not None:
        book.games = load_games_csv(games_path)
    if game_ratings_path is not None:
        book.game_diffs.update(load_game_ratings_csv(game_ratings_path))
    return book

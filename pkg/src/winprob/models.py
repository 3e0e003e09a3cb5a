"""The three predictors (logistic GLM, Gaussian naive Bayes, small FNN)
plus Platt score calibration and model file IO.

All training routines are seed-deterministic and operate on a standardized
design matrix; the fitted models embed their StandardizationStats so
prediction from a raw GameState is self-contained.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .core import (
    N_FEATURES,
    SCHEMA_VERSION,
    GameState,
    GlmModel,
    PlattParams,
    StandardizationStats,
    TrainingMeta,
    _frozen_array,
    _require_version,
    canonical_json,
)
from .errors import ConvergenceError, ModelFormatError, SchemaError, ValidationError
from .features import featurize_matrix, standardize_matrix

#: Logit magnitude beyond which the sigmoid saturates in float64 anyway;
#: clamping here keeps every emitted probability strictly inside (0, 1).
_LOGIT_CLAMP = 35.0

_PROB_EPS = 1e-15


@dataclass(frozen=True)
class TrainConfig:
    """Knobs shared by the trainers; unused fields are ignored per model."""

    seed: int = 0
    max_iter: int = 100
    tol: float = 1e-10
    grad_tol: float = 1e-8
    ridge: float = 1e-6
    learning_rate: float = 1.0
    momentum: float = 0.9
    epochs: int = 1500
    batch_size: Optional[int] = None
    hidden_activation: str = "sigmoid"

    def __post_init__(self):
        if self.max_iter < 1 or self.epochs < 0:
            raise ValidationError("iteration counts must be positive")
        if self.tol <= 0 or self.grad_tol <= 0:
            raise ValidationError("tolerances must be positive")
        if self.ridge < 0:
            raise ValidationError("ridge must be nonnegative")
        if self.learning_rate <= 0:
            raise ValidationError("learning rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ValidationError("momentum must lie in [0, 1)")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValidationError("batch_size must be positive when given")
        if self.hidden_activation not in ("sigmoid", "tanh"):
            raise ValidationError(f"unknown hidden activation {self.hidden_activation!r}")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -_LOGIT_CLAMP, _LOGIT_CLAMP)))


def _check_design(x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or x.shape[1] != N_FEATURES:
        raise ValidationError(f"design must be N x {N_FEATURES}, got {x.shape}")
    if y.shape != (x.shape[0],):
        raise ValidationError("labels must be a vector matching the design rows")
    if np.any((y != 0) & (y != 1)):
        raise ValidationError("labels must be 0 or 1")
    return x, y


# ---------------------------------------------------------------------------
# Logistic regression


def train_glm(
    x: np.ndarray,
    y: Sequence[int],
    cfg: TrainConfig = TrainConfig(),
    stats: Optional[StandardizationStats] = None,
) -> GlmModel:
    """Fit the logistic model by Newton/IRLS with step-halving.

    Maximizes the log-likelihood minus (ridge/2)*||w||^2, the intercept
    unpenalized. Accepted steps never decrease the penalized likelihood;
    convergence is an improvement below cfg.tol or gradient infinity-norm
    below cfg.grad_tol. `stats` is embedded in the returned model so it can
    predict raw states (pass the stats the design was standardized with).
    """
    x, y = _check_design(x, y)
    n = x.shape[0]
    if n <= N_FEATURES + 1:
        raise ValidationError(f"need more rows than coefficients, got {n}")
    if stats is None:
        stats = StandardizationStats(mean=np.zeros(N_FEATURES), sd=np.ones(N_FEATURES))
    design = np.column_stack([np.ones(n), x])
    penalty_mask = np.ones(N_FEATURES + 1)
    penalty_mask[0] = 0.0

    def penalized_ll(theta: np.ndarray) -> float:
        eta = design @ theta
        ll = float(y @ eta - np.logaddexp(0.0, eta).sum())
        return ll - 0.5 * cfg.ridge * float(np.sum((penalty_mask * theta) ** 2))

    theta = np.zeros(N_FEATURES + 1)
    pll = penalized_ll(theta)
    trace = [pll]
    converged = False
    iterations = 0
    for _ in range(cfg.max_iter):
        eta = design @ theta
        mu = _sigmoid(eta)
        grad = design.T @ (y - mu) - cfg.ridge * penalty_mask * theta
        if float(np.max(np.abs(grad))) < cfg.grad_tol:
            converged = True
            break
        w_irls = np.maximum(mu * (1.0 - mu), 1e-10)
        hess = design.T @ (design * w_irls[:, None])
        hess[range(N_FEATURES + 1), range(N_FEATURES + 1)] += cfg.ridge * penalty_mask
        try:
            direction = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("IRLS system singular; increase ridge") from exc
        step = 1.0
        improved = False
        for _ in range(50):
            cand = theta + step * direction
            cand_pll = penalized_ll(cand)
            if cand_pll >= pll:
                improved = True
                break
            step *= 0.5
        if not improved:
            converged = True  # no ascent direction improves: at the optimum numerically
            break
        iterations += 1
        delta = cand_pll - pll
        theta, pll = cand, cand_pll
        trace.append(pll)
        if float(np.max(np.abs(theta))) > 1e4:
            raise ConvergenceError(
                "coefficient blow-up suggests quasi-separated data; increase ridge"
            )
        if delta < cfg.tol:
            converged = True
            break
    if not converged:
        tail = ", ".join(f"{v:.6f}" for v in trace[-5:])
        raise ConvergenceError(
            f"IRLS did not converge in {cfg.max_iter} iterations; last objectives: {tail}"
        )
    return GlmModel(
        intercept=float(theta[0]),
        weights=theta[1:],
        stats=stats,
        meta=TrainingMeta(seed=cfg.seed, iterations=iterations, final_objective=pll),
    )


# ---------------------------------------------------------------------------
# Gaussian naive Bayes


@dataclass(frozen=True, eq=False)
class NaiveBayesModel:
    """Class priors plus per-class, per-column Gaussian likelihoods."""

    prior_pos: float
    mean_pos: np.ndarray
    var_pos: np.ndarray
    mean_neg: np.ndarray
    var_neg: np.ndarray
    stats: StandardizationStats
    meta: TrainingMeta

    model_type = "nb"
    VAR_FLOOR = 1e-9

    def __post_init__(self):
        if not 0.0 < self.prior_pos < 1.0:
            raise ValidationError("class prior must lie strictly in (0, 1)")
        for name in ("mean_pos", "var_pos", "mean_neg", "var_neg"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), N_FEATURES))
        if np.any(self.var_pos < self.VAR_FLOOR) or np.any(self.var_neg < self.VAR_FLOOR):
            raise ValidationError(f"variances must be floored at {self.VAR_FLOOR}")

    def __eq__(self, other):
        if not isinstance(other, NaiveBayesModel):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "model_type": self.model_type,
            "stats": self.stats.to_dict(),
            "params": {
                "prior_pos": self.prior_pos,
                "mean_pos": [float(v) for v in self.mean_pos],
                "var_pos": [float(v) for v in self.var_pos],
                "mean_neg": [float(v) for v in self.mean_neg],
                "var_neg": [float(v) for v in self.var_neg],
            },
            "training_meta": self.meta.to_dict(),
        }

    @classmethod
    def from_dict(cls, d) -> "NaiveBayesModel":
        _require_version(d)
        if d.get("model_type") != cls.model_type:
            raise SchemaError(f"expected model_type {cls.model_type!r}, found {d.get('model_type')!r}")
        p = d["params"]
        return cls(
            prior_pos=p["prior_pos"],
            mean_pos=p["mean_pos"],
            var_pos=p["var_pos"],
            mean_neg=p["mean_neg"],
            var_neg=p["var_neg"],
            stats=StandardizationStats.from_dict(d["stats"]),
            meta=TrainingMeta.from_dict(d["training_meta"]),
        )


def train_nb(
    x: np.ndarray,
    y: Sequence[int],
    stats: Optional[StandardizationStats] = None,
) -> NaiveBayesModel:
    """Closed-form Gaussian fit per class and column.

    Priors are class frequencies; variances are maximum-likelihood (divisor
    N) with a 1e-9 floor so constant columns cannot divide by zero.
    """
    x, y = _check_design(x, y)
    if stats is None:
        stats = StandardizationStats(mean=np.zeros(N_FEATURES), sd=np.ones(N_FEATURES))
    pos = y == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("both classes must be present")
    floor = NaiveBayesModel.VAR_FLOOR
    return NaiveBayesModel(
        prior_pos=n_pos / (n_pos + n_neg),
        mean_pos=x[pos].mean(axis=0),
        var_pos=np.maximum(x[pos].var(axis=0), floor),
        mean_neg=x[~pos].mean(axis=0),
        var_neg=np.maximum(x[~pos].var(axis=0), floor),
        stats=stats,
        meta=TrainingMeta(seed=None, iterations=1, final_objective=0.0),
    )


def _nb_posterior(m: NaiveBayesModel, xs: np.ndarray) -> np.ndarray:
    def log_like(mean, var, prior):
        return (
            math.log(prior)
            - 0.5 * float(np.sum(np.log(2.0 * math.pi * var)))
            - 0.5 * ((xs - mean) ** 2 / var).sum(axis=1)
        )

    l_pos = log_like(m.mean_pos, m.var_pos, m.prior_pos)
    l_neg = log_like(m.mean_neg, m.var_neg, 1.0 - m.prior_pos)
    p = np.exp(l_pos - np.logaddexp(l_pos, l_neg))
    return np.clip(p, _PROB_EPS, 1.0 - _PROB_EPS)


# ---------------------------------------------------------------------------
# Feedforward network 21 -> 6 -> 3 -> 1

_FNN_DIMS = ((N_FEATURES, 6), (6, 3), (3, 1))
_FNN_PARAM_NAMES = ("w1", "b1", "w2", "b2", "w3", "b3")


@dataclass(frozen=True, eq=False)
class FnnModel:
    """Two-hidden-layer network; sigmoid output, configurable hidden units."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray
    hidden_activation: str
    stats: StandardizationStats
    meta: TrainingMeta

    model_type = "fnn"

    def __post_init__(self):
        for (name_w, name_b), (d_in, d_out) in zip((("w1", "b1"), ("w2", "b2"), ("w3", "b3")), _FNN_DIMS):
            w = np.asarray(getattr(self, name_w), dtype=float)
            b = np.asarray(getattr(self, name_b), dtype=float)
            if w.shape != (d_in, d_out) or b.shape != (d_out,):
                raise ValidationError(
                    f"layer {name_w} must be {d_in}x{d_out} with bias {d_out}, got {w.shape} and {b.shape}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValidationError(f"layer {name_w} contains non-finite values")
            for name, arr in ((name_w, w), (name_b, b)):
                arr = arr.copy()
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)
        if self.hidden_activation not in ("sigmoid", "tanh"):
            raise ValidationError(f"unknown hidden activation {self.hidden_activation!r}")

    def __eq__(self, other):
        if not isinstance(other, FnnModel):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def params(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in _FNN_PARAM_NAMES}

    def to_dict(self) -> dict:
        params = {name: np.asarray(getattr(self, name)).tolist() for name in _FNN_PARAM_NAMES}
        params["hidden_activation"] = self.hidden_activation
        return {
            "schema_version": SCHEMA_VERSION,
            "model_type": self.model_type,
            "stats": self.stats.to_dict(),
            "params": params,
            "training_meta": self.meta.to_dict(),
        }

    @classmethod
    def from_dict(cls, d) -> "FnnModel":
        _require_version(d)
        if d.get("model_type") != cls.model_type:
            raise SchemaError(f"expected model_type {cls.model_type!r}, found {d.get('model_type')!r}")
        p = d["params"]
        return cls(
            w1=np.array(p["w1"]),
            b1=np.array(p["b1"]),
            w2=np.array(p["w2"]),
            b2=np.array(p["b2"]),
            w3=np.array(p["w3"]),
            b3=np.array(p["b3"]),
            hidden_activation=p["hidden_activation"],
            stats=StandardizationStats.from_dict(d["stats"]),
            meta=TrainingMeta.from_dict(d["training_meta"]),
        )


def _hidden_act(z: np.ndarray, kind: str) -> np.ndarray:
    return _sigmoid(z) if kind == "sigmoid" else np.tanh(z)


def _hidden_act_grad(a: np.ndarray, kind: str) -> np.ndarray:
    return a * (1.0 - a) if kind == "sigmoid" else 1.0 - a * a


def _fnn_forward(params: Dict[str, np.ndarray], xs: np.ndarray, kind: str):
    a1 = _hidden_act(xs @ params["w1"] + params["b1"], kind)
    a2 = _hidden_act(a1 @ params["w2"] + params["b2"], kind)
    z3 = (a2 @ params["w3"] + params["b3"])[:, 0]
    return a1, a2, z3


def fnn_loss(m: FnnModel, xs: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy on an already-standardized design."""
    _, _, z3 = _fnn_forward(m.params(), np.asarray(xs, dtype=float), m.hidden_activation)
    y = np.asarray(y, dtype=float)
    return float(np.mean(np.logaddexp(0.0, z3) - y * z3))


def fnn_gradients(m: FnnModel, xs: np.ndarray, y: np.ndarray) -> Dict[str, np.ndarray]:
    """Analytic gradient of fnn_loss with respect to every parameter."""
    xs = np.asarray(xs, dtype=float)
    y = np.asarray(y, dtype=float)
    params = m.params()
    kind = m.hidden_activation
    a1, a2, z3 = _fnn_forward(params, xs, kind)
    p = _sigmoid(z3)
    dz3 = ((p - y) / xs.shape[0])[:, None]
    grads = {
        "w3": a2.T @ dz3,
        "b3": dz3.sum(axis=0),
    }
    da2 = dz3 @ params["w3"].T
    dz2 = da2 * _hidden_act_grad(a2, kind)
    grads["w2"] = a1.T @ dz2
    grads["b2"] = dz2.sum(axis=0)
    da1 = dz2 @ params["w2"].T
    dz1 = da1 * _hidden_act_grad(a1, kind)
    grads["w1"] = xs.T @ dz1
    grads["b1"] = dz1.sum(axis=0)
    return grads


def _init_fnn_params(seed: int) -> Dict[str, np.ndarray]:
    rng = np.random.default_rng(seed)
    params: Dict[str, np.ndarray] = {}
    for (d_in, d_out), (name_w, name_b) in zip(_FNN_DIMS, (("w1", "b1"), ("w2", "b2"), ("w3", "b3"))):
        params[name_w] = rng.uniform(-0.5, 0.5, size=(d_in, d_out))
        params[name_b] = rng.uniform(-0.5, 0.5, size=d_out)
    return params


def train_fnn(
    x: np.ndarray,
    y: Sequence[int],
    cfg: TrainConfig = TrainConfig(),
    stats: Optional[StandardizationStats] = None,
) -> FnnModel:
    """Gradient descent with momentum on mean cross-entropy.

    Full-batch by default; cfg.batch_size switches to seeded mini-batches.
    Initial parameters are uniform in [-0.5, 0.5] drawn from cfg.seed, so
    identical configs give bit-identical models.
    """
    x, y = _check_design(x, y)
    if stats is None:
        stats = StandardizationStats(mean=np.zeros(N_FEATURES), sd=np.ones(N_FEATURES))
    params = _init_fnn_params(cfg.seed)
    velocity = {k: np.zeros_like(v) for k, v in params.items()}
    rng = np.random.default_rng(cfg.seed + 1)
    n = x.shape[0]
    kind = cfg.hidden_activation

    def batch_grads(bx, by):
        model_view = FnnModel(
            hidden_activation=kind,
            stats=stats,
            meta=_ZERO_META,
            **params,
        )
        return fnn_gradients(model_view, bx, by)

    loss = math.inf
    for epoch in range(cfg.epochs):
        if cfg.batch_size is None or cfg.batch_size >= n:
            batches = [(x, y)]
        else:
            order = rng.permutation(n)
            batches = [
                (x[order[i : i + cfg.batch_size]], y[order[i : i + cfg.batch_size]])
                for i in range(0, n, cfg.batch_size)
            ]
        for bx, by in batches:
            grads = batch_grads(bx, by)
            for name in _FNN_PARAM_NAMES:
                velocity[name] = cfg.momentum * velocity[name] - cfg.learning_rate * grads[name]
                params[name] = params[name] + velocity[name]
        loss = _loss_of(params, x, y, kind)
        if not math.isfinite(loss):
            raise ConvergenceError(f"non-finite training loss at epoch {epoch}")
    if cfg.epochs == 0:
        loss = _loss_of(params, x, y, kind)
    return FnnModel(
        hidden_activation=kind,
        stats=stats,
        meta=TrainingMeta(seed=cfg.seed, iterations=cfg.epochs, final_objective=loss),
        **params,
    )


_ZERO_META = TrainingMeta(seed=None, iterations=0, final_objective=0.0)


def _loss_of(params: Dict[str, np.ndarray], xs: np.ndarray, y: np.ndarray, kind: str) -> float:
    _, _, z3 = _fnn_forward(params, xs, kind)
    return float(np.mean(np.logaddexp(0.0, z3) - np.asarray(y, dtype=float) * z3))


# ---------------------------------------------------------------------------
# Platt calibration


def fit_platt(scores: Sequence[float], labels: Sequence[int], tol: float = 1e-10, max_iter: int = 200) -> PlattParams:
    """Newton fit of p = 1 / (1 + exp(a*score + b)).

    Targets use the (N+ + 1)/(N+ + 2) and 1/(N- + 2) label smoothing so the
    likelihood stays bounded even on separable scores.
    """
    f = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=float)
    if f.ndim != 1 or f.shape != y.shape or f.size < 2:
        raise ValidationError("scores and labels must be matching vectors of length >= 2")
    if not np.all(np.isfinite(f)):
        raise ValidationError("scores must be finite")
    if np.any((y != 0) & (y != 1)):
        raise ValidationError("labels must be 0 or 1")
    n_pos = float(y.sum())
    n_neg = float(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("both labels must be present")
    if float(np.ptp(f)) == 0.0:
        raise ConvergenceError("calibration system singular: scores are constant")
    target = np.where(y == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

    design = np.column_stack([f, np.ones_like(f)])
    theta = np.array([0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))])

    def ll(th: np.ndarray) -> float:
        z = design @ th
        # p = sigmoid(-z); log p = -logaddexp(0, z); log(1-p) = -logaddexp(0, -z)
        return float(-(target * np.logaddexp(0.0, z) + (1.0 - target) * np.logaddexp(0.0, -z)).sum())

    cur = ll(theta)
    for _ in range(max_iter):
        z = design @ theta
        p = _sigmoid(-z)
        # p = sigmoid(-z) flips the usual orientation: dLL/dtheta = X'(p - t)
        grad = design.T @ (p - target)
        if float(np.linalg.norm(grad)) < tol:
            break
        w = np.maximum(p * (1.0 - p), 1e-12)
        hess = design.T @ (design * w[:, None])
        try:
            direction = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("calibration system singular (constant scores?)") from exc
        step = 1.0
        improved = False
        for _ in range(50):
            cand = theta + step * direction
            cand_ll = ll(cand)
            if cand_ll >= cur:
                improved = True
                break
            step *= 0.5
        if not improved:
            break  # no ascent step improves: numerically at the optimum
        theta, cur = cand, cand_ll
    else:
        raise ConvergenceError(
            f"Platt fit did not reach gradient tolerance {tol} in {max_iter} iterations"
        )
    return PlattParams(a=float(theta[0]), b=float(theta[1]))


def apply_platt(p: PlattParams, score: float) -> float:
    """Calibrated probability 1 / (1 + exp(a*score + b)), strictly in (0,1)."""
    return float(_sigmoid(-(p.a * float(score) + p.b)))


# ---------------------------------------------------------------------------
# Prediction entry points and file IO

_MODEL_CLASSES = {"glm": GlmModel, "nb": NaiveBayesModel, "fnn": FnnModel}
Model = object  # any of the three model classes


def predict_matrix(model, xs: np.ndarray) -> np.ndarray:
    """Probabilities for an already-standardized design matrix."""
    if isinstance(model, GlmModel):
        return _sigmoid(model.intercept + xs @ model.weights)
    if isinstance(model, NaiveBayesModel):
        return _nb_posterior(model, xs)
    if isinstance(model, FnnModel):
        _, _, z3 = _fnn_forward(model.params(), xs, model.hidden_activation)
        return _sigmoid(z3)
    raise ValidationError(f"unknown model object {type(model).__name__}")


def predict_states(model, states: Sequence[GameState]) -> np.ndarray:
    """Featurize, standardize with the model's embedded stats, predict."""
    xs = standardize_matrix(featurize_matrix(states), model.stats)
    return predict_matrix(model, xs)


def predict(model, state: GameState) -> float:
    """Home win probability for one state; shared by CLI and service."""
    return float(predict_states(model, [state])[0])


def save_model(model, path) -> None:
    """Write the versioned JSON envelope, byte-deterministic."""
    with open(path, "w") as fh:
        fh.write(canonical_json(model.to_dict()))


def load_model(path):
    """Read a model envelope back; dispatches on model_type."""
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not a valid model file (truncated or corrupt JSON): {path}") from exc
    if not isinstance(d, dict):
        raise ModelFormatError(f"model file must contain a JSON object: {path}")
    kind = d.get("model_type")
    cls = _MODEL_CLASSES.get(kind)
    if cls is None:
        raise ModelFormatError(f"unknown model_type {kind!r} in {path}")
    return cls.from_dict(d)

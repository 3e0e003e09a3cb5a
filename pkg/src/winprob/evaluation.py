"""Accuracy and calibration harness.

Metric primitives operate on parallel (prediction, label) arrays; the
harness entry points run a trained model over a Dataset and aggregate per
time bucket. The reliability line is fitted by count-weighted least
squares because tail probability bins are sparse and would otherwise
dominate the fit with noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import stats as _scipy_stats

from .core import EvalReport, ReliabilityBin, ReliabilityCurve, ReliabilityLine
from .errors import ValidationError

#: Buckets with fewer states than this are flagged low-sample.
LOW_SAMPLE_THRESHOLD = 30


def _as_pred_label_arrays(preds, labels) -> Tuple[np.ndarray, np.ndarray]:
    p = np.asarray(preds, dtype=float)
    y = np.asarray(labels, dtype=float)
    if p.ndim != 1 or y.ndim != 1:
        raise ValidationError("predictions and labels must be 1-D")
    if p.shape != y.shape:
        raise ValidationError(f"length mismatch: {p.shape[0]} predictions vs {y.shape[0]} labels")
    if p.size < 1:
        raise ValidationError("need at least one prediction")
    if np.any(~np.isfinite(p)) or np.any((p < 0) | (p > 1)):
        raise ValidationError("predictions must lie in [0, 1]")
    if np.any((y != 0) & (y != 1)):
        raise ValidationError("labels must be 0 or 1")
    return p, y


def brier(preds: Sequence[float], labels: Sequence[int]) -> float:
    """Mean squared distance between predicted probability and outcome."""
    p, y = _as_pred_label_arrays(preds, labels)
    return float(np.mean((p - y) ** 2))


def climatology_brier(labels: Sequence[int]) -> float:
    """Brier of the constant base-rate forecast; equals q(1-q) exactly."""
    y = np.asarray(labels, dtype=float)
    if y.size < 1:
        raise ValidationError("need at least one label")
    if np.any((y != 0) & (y != 1)):
        raise ValidationError("labels must be 0 or 1")
    q = float(y.mean())
    return q * (1.0 - q)


def accuracy(preds: Sequence[float], labels: Sequence[int], threshold: float = 0.5) -> float:
    """Fraction of correct win/loss calls; a prediction at the threshold
    counts as a home-win call."""
    p, y = _as_pred_label_arrays(preds, labels)
    calls = (p >= threshold).astype(float)
    return float(np.mean(calls == y))


def reliability_curve(preds, labels, bin_width: float = 0.05) -> ReliabilityCurve:
    """Bin predictions into [k*w, (k+1)*w) and compare to outcome rates.

    The final bin is closed at 1.0; empty bins are omitted entirely.
    """
    p, y = _as_pred_label_arrays(preds, labels)
    n_bins = round(1.0 / bin_width)
    if n_bins < 1 or abs(n_bins * bin_width - 1.0) > 1e-12:
        raise ValidationError(f"bin width {bin_width} does not divide 1")
    # membership must agree with the reported edges at float boundaries, so
    # assign against the edge array itself rather than dividing
    edges = np.array([k * bin_width for k in range(n_bins)] + [1.0])
    idx = np.clip(np.searchsorted(edges, p, side="right") - 1, 0, n_bins - 1)
    bins = []
    for k in range(n_bins):
        mask = idx == k
        count = int(mask.sum())
        if count == 0:
            continue
        bins.append(
            ReliabilityBin(
                lo=float(edges[k]),
                hi=float(edges[k + 1]),
                mean_pred=float(p[mask].mean()),
                emp_freq=float(y[mask].mean()),
                count=count,
            )
        )
    return ReliabilityCurve(bins=tuple(bins), bin_width=bin_width, n=int(p.size))


def fit_reliability_line(curve: ReliabilityCurve) -> ReliabilityLine:
    """Weighted least squares of empirical frequency on mean prediction.

    Weights are bin counts; confidence intervals are normal-theory 95%
    bands with n_bins - 2 degrees of freedom.
    """
    if len(curve.bins) < 3:
        raise ValidationError(f"need at least 3 occupied bins, got {len(curve.bins)}")
    x = np.array([b.mean_pred for b in curve.bins])
    y = np.array([b.emp_freq for b in curve.bins])
    w = np.array([b.count for b in curve.bins], dtype=float)
    design = np.column_stack([np.ones_like(x), x])
    wd = design * w[:, None]
    xtwx = design.T @ wd
    coef = np.linalg.solve(xtwx, wd.T @ y)
    intercept, slope = float(coef[0]), float(coef[1])

    resid = y - design @ coef
    dof = len(curve.bins) - 2
    if dof > 0:
        s2 = float(w @ resid**2) / dof
        cov = s2 * np.linalg.inv(xtwx)
        t_crit = float(_scipy_stats.t.ppf(0.975, dof))
        se = np.sqrt(np.diag(cov))
    else:
        t_crit, se = math.inf, np.zeros(2)
    y_bar = float(w @ y) / float(w.sum())
    ss_tot = float(w @ (y - y_bar) ** 2)
    ss_res = float(w @ resid**2)
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return ReliabilityLine(
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        slope_ci=(slope - t_crit * se[1], slope + t_crit * se[1]),
        intercept_ci=(intercept - t_crit * se[0], intercept + t_crit * se[0]),
    )


def evaluate_predictions(preds, labels, bin_width: float = 0.05) -> EvalReport:
    """Aggregate the metric primitives into one report.

    The reliability line needs at least 3 occupied bins; with fewer (sharp
    late-game buckets concentrate mass at the ends) the field is None.
    """
    p, y = _as_pred_label_arrays(preds, labels)
    curve = reliability_curve(p, y, bin_width)
    line = fit_reliability_line(curve) if len(curve.bins) >= 3 else None
    return EvalReport(
        accuracy=accuracy(p, y),
        brier=brier(p, y),
        brier_climatology=climatology_brier(y),
        reliability=line,
        n=int(p.size),
    )


def evaluate(model, test, bin_width: float = 0.05) -> EvalReport:
    """Run a trained model over a Dataset and score the predictions."""
    from .models import predict_states

    if not test.pairs:
        raise ValidationError("test set is empty")
    states = [s for s, _ in test.pairs]
    labels = np.array([lab for _, lab in test.pairs], dtype=float)
    return evaluate_predictions(predict_states(model, states), labels, bin_width)


@dataclass(frozen=True)
class TimeBucket:
    """Per-bucket evaluation; low_sample marks buckets below 30 states."""

    bucket: int
    t_lo: int
    t_hi: int
    low_sample: bool
    report: EvalReport

    def to_dict(self) -> dict:
        return {
            "bucket": self.bucket,
            "t_lo": self.t_lo,
            "t_hi": self.t_hi,
            "low_sample": self.low_sample,
            "report": self.report.to_dict(),
        }


def time_bucketed_eval(model, test, bucket_s: int = 300) -> List[TimeBucket]:
    """Partition states by floor(time_elapsed_s / bucket_s) and score each.

    Buckets are emitted in time order; empty buckets are skipped; buckets
    with fewer than 30 states are flagged, not suppressed.
    """
    from .models import predict_states

    if bucket_s < 1:
        raise ValidationError("bucket_s must be positive")
    if not test.pairs:
        raise ValidationError("test set is empty")
    states = [s for s, _ in test.pairs]
    labels = np.array([lab for _, lab in test.pairs], dtype=float)
    preds = predict_states(model, states)
    idx = np.array([s.time_elapsed_s // bucket_s for s in states])
    out = []
    for k in sorted(set(int(i) for i in idx)):
        mask = idx == k
        report = evaluate_predictions(preds[mask], labels[mask])
        out.append(
            TimeBucket(
                bucket=k,
                t_lo=k * bucket_s,
                t_hi=(k + 1) * bucket_s,
                low_sample=report.n < LOW_SAMPLE_THRESHOLD,
                report=report,
            )
        )
    return out


def drive_linearity_r2(
    drives: Sequence[Tuple[float, float]],
    inside_window: Sequence[bool],
) -> Tuple[float, float]:
    """R-squared of drive yardage on drive duration, split by window flag.

    The flag marks drives that started close enough to a half or game end
    to be clock-truncated. Both groups need at least 3 drives and
    non-degenerate variance in each coordinate.
    """
    if len(drives) != len(inside_window):
        raise ValidationError("one window flag per drive required")
    t = np.asarray([d[0] for d in drives], dtype=float)
    yd = np.asarray([d[1] for d in drives], dtype=float)
    flags = np.asarray(inside_window, dtype=bool)

    def r2(mask: np.ndarray, name: str) -> float:
        if mask.sum() < 3:
            raise ValidationError(f"need at least 3 drives {name} the window, got {int(mask.sum())}")
        tx, ty = t[mask], yd[mask]
        if np.ptp(tx) == 0 or np.ptp(ty) == 0:
            raise ValidationError(f"degenerate variance in the {name}-window group")
        slope, intercept = np.polyfit(tx, ty, 1)
        resid = ty - (slope * tx + intercept)
        return float(1.0 - np.sum(resid**2) / np.sum((ty - ty.mean()) ** 2))

    return r2(flags, "inside"), r2(~flags, "outside")

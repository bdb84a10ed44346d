"""Evaluation and calibration metrics.

Conventions, pinned once here:
- roc_auc follows the Mann-Whitney convention: ties get half credit, so the
  result is permutation-invariant.
- kendall_tau is tau-b (tie-corrected); binary labels make ties pervasive.
- f1_macro_optimal scans midpoints between adjacent sorted unique scores
  plus below-min / above-max sentinels and returns the lowest threshold
  attaining the best macro F1.
- ece bins scores into K equal widths over [0, 1], top bin right-closed.
  Accuracy in a bin is the rate at which the thresholded prediction matches
  the label; confidence is the mean score. `calibration_curve` is the
  companion positive-fraction view of the same binning: the two disagree on
  purpose for bins below the decision threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


def _as_float_array(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    return arr


def _as_label_array(labels) -> np.ndarray:
    arr = np.asarray([bool(v) for v in labels], dtype=bool)
    return arr


def _check_binary(labels: np.ndarray) -> None:
    if labels.all() or (~labels).all():
        raise ValidationError("both classes must be present")


# ---------------------------------------------------------------------------
# Ranking and correlation


def roc_auc(scores, labels) -> float:
    """Probability that a random positive outranks a random negative."""
    s = _as_float_array(scores, "scores")
    y = _as_label_array(labels)
    if len(s) != len(y):
        raise ValidationError(f"length mismatch: {len(s)} scores, {len(y)} labels")
    _check_binary(y)
    order = np.argsort(s, kind="stable")
    sorted_scores = s[order]
    ranks = np.empty(len(s), dtype=float)
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0  # midrank, 1-based
        i = j + 1
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    rank_sum = float(ranks[y].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def pearson(x, y) -> float:
    """Product-moment correlation."""
    xa = _as_float_array(x, "x")
    ya = _as_float_array(y, "y")
    if len(xa) != len(ya):
        raise ValidationError(f"length mismatch: {len(xa)} vs {len(ya)}")
    if len(xa) < 2:
        raise ValidationError("need at least 2 points")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        raise ValidationError("constant input has undefined correlation")
    return float((dx * dy).sum()) / (sx * sy)


def kendall_tau(x, y) -> float:
    """Tau-b: (concordant - discordant) / sqrt((n0 - tx) * (n0 - ty))."""
    xa = _as_float_array(x, "x")
    ya = _as_float_array(y, "y")
    if len(xa) != len(ya):
        raise ValidationError(f"length mismatch: {len(xa)} vs {len(ya)}")
    n = len(xa)
    if n < 2:
        raise ValidationError("need at least 2 points")
    sx = np.sign(xa[:, None] - xa[None, :])
    sy = np.sign(ya[:, None] - ya[None, :])
    iu = np.triu_indices(n, k=1)
    prod = sx[iu] * sy[iu]
    concordant_minus_discordant = float(prod.sum())
    n0 = n * (n - 1) / 2.0
    ties_x = n0 - float(np.count_nonzero(sx[iu]))
    ties_y = n0 - float(np.count_nonzero(sy[iu]))
    denom = np.sqrt((n0 - ties_x) * (n0 - ties_y))
    if denom == 0.0:
        raise ValidationError("constant input has undefined tau")
    return concordant_minus_discordant / denom


# ---------------------------------------------------------------------------
# Thresholded classification


def _f1(tp: int, fp: int, fn: int) -> float:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def macro_f1(predictions, labels) -> float:
    """Unweighted mean of the per-class F1 scores."""
    pred = _as_label_array(predictions)
    y = _as_label_array(labels)
    if len(pred) != len(y):
        raise ValidationError(f"length mismatch: {len(pred)} vs {len(y)}")
    tp = int((pred & y).sum())
    fp = int((pred & ~y).sum())
    fn = int((~pred & y).sum())
    tn = int((~pred & ~y).sum())
    return (_f1(tp, fp, fn) + _f1(tn, fn, fp)) / 2.0


def candidate_thresholds(scores) -> list[float]:
    """Midpoints between adjacent sorted unique scores, plus sentinels below
    the minimum and above the maximum."""
    uniq = sorted(set(float(v) for v in scores))
    cands = [uniq[0] - 0.5]
    cands.extend((a + b) / 2.0 for a, b in zip(uniq, uniq[1:]))
    cands.append(uniq[-1] + 0.5)
    return cands


def f1_macro_optimal(scores, labels) -> tuple[float, float]:
    """Best macro F1 over all thresholds and the lowest threshold attaining it."""
    s = _as_float_array(scores, "scores")
    y = _as_label_array(labels)
    if len(s) != len(y):
        raise ValidationError(f"length mismatch: {len(s)} scores, {len(y)} labels")
    _check_binary(y)
    best_f1 = -1.0
    best_threshold = 0.0
    for t in candidate_thresholds(s):
        f1 = macro_f1(s >= t, y)
        if f1 > best_f1:  # strict: keep the lowest threshold on ties
            best_f1 = f1
            best_threshold = t
    return best_f1, best_threshold


# ---------------------------------------------------------------------------
# Calibration


@dataclass(frozen=True)
class CalibrationBin:
    lo: float
    hi: float
    size: int
    acc: float  # prediction-label agreement rate; 0.0 for empty bins
    conf: float  # mean score; 0.0 for empty bins


@dataclass(frozen=True)
class CalibrationReport:
    bins: tuple[CalibrationBin, ...]
    ece: float
    n: int
    decision_threshold: float

    def to_dict(self) -> dict:
        return {
            "ece": self.ece,
            "n": self.n,
            "decision_threshold": self.decision_threshold,
            "bins": [
                {"lo": b.lo, "hi": b.hi, "size": b.size, "acc": b.acc, "conf": b.conf}
                for b in self.bins
            ],
        }


def _bin_index(probs: np.ndarray, k: int) -> np.ndarray:
    idx = np.floor(probs * k).astype(int)
    return np.clip(idx, 0, k - 1)  # 1.0 lands in the top (right-closed) bin


def ece(probs, labels, bins: int = 10, decision_threshold: float = 0.5) -> CalibrationReport:
    """Expected calibration error over K equal-width bins.

    Per bin: acc = mean agreement between [p >= decision_threshold] and the
    label, conf = mean p. ECE is the bin-size-weighted mean absolute gap.
    """
    p = _as_float_array(probs, "probs")
    y = _as_label_array(labels)
    if len(p) != len(y):
        raise ValidationError(f"length mismatch: {len(p)} probs, {len(y)} labels")
    if bins < 1:
        raise ValidationError(f"bin count must be >= 1, got {bins}")
    if len(p) and (p.min() < 0.0 or p.max() > 1.0):
        raise ValidationError("probabilities must lie in [0, 1]")
    predicted = p >= decision_threshold
    idx = _bin_index(p, bins)
    out = []
    total = 0.0
    n = len(p)
    for b in range(bins):
        members = idx == b
        size = int(members.sum())
        if size:
            acc = float((predicted[members] == y[members]).mean())
            conf = float(p[members].mean())
            total += (size / n) * abs(acc - conf)
        else:
            acc = conf = 0.0
        out.append(CalibrationBin(lo=b / bins, hi=(b + 1) / bins, size=size, acc=acc, conf=conf))
    return CalibrationReport(
        bins=tuple(out), ece=total, n=n, decision_threshold=decision_threshold
    )


@dataclass(frozen=True)
class CurvePoint:
    mean_prob: float
    frac_positive: float
    size: int


def calibration_curve(probs, labels, bins: int = 10) -> list[CurvePoint]:
    """Reliability curve: per non-empty bin, (mean score, fraction of
    positive labels, bin size). Diagonal means calibrated."""
    p = _as_float_array(probs, "probs")
    y = _as_label_array(labels)
    if len(p) != len(y):
        raise ValidationError(f"length mismatch: {len(p)} probs, {len(y)} labels")
    if bins < 1:
        raise ValidationError(f"bin count must be >= 1, got {bins}")
    if len(p) and (p.min() < 0.0 or p.max() > 1.0):
        raise ValidationError("probabilities must lie in [0, 1]")
    idx = _bin_index(p, bins)
    points = []
    for b in range(bins):
        members = idx == b
        size = int(members.sum())
        if size:
            points.append(
                CurvePoint(
                    mean_prob=float(p[members].mean()),
                    frac_positive=float(y[members].mean()),
                    size=size,
                )
            )
    return points


# ---------------------------------------------------------------------------
# Retrieval and report assembly


def retrieval_recall(hits) -> float:
    """Fraction of claims whose retrieved unit was annotated relevant."""
    hits = list(hits)
    if not hits:
        raise ValidationError("need at least one retrieval outcome")
    return sum(bool(h) for h in hits) / len(hits)


@dataclass
class EvalReport:
    n: int
    roc_auc: float
    pearson: float
    kendall_tau: float
    f1_macro: float
    optimal_threshold: float
    wall_clock_s: float
    scorer_calls_total: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "roc_auc": self.roc_auc,
            "pearson": self.pearson,
            "kendall_tau": self.kendall_tau,
            "f1_macro": self.f1_macro,
            "optimal_threshold": self.optimal_threshold,
            "wall_clock_s": self.wall_clock_s,
            "scorer_calls_total": self.scorer_calls_total,
        }


def evaluate_scores(
    scores, labels, wall_clock_s: float = 0.0, scorer_calls_total: int = 0
) -> EvalReport:
    """Assemble the full accuracy report for scored, labeled claims."""
    s = [float(v) for v in scores]
    y = [bool(v) for v in labels]
    f1, threshold = f1_macro_optimal(s, y)
    return EvalReport(
        n=len(s),
        roc_auc=roc_auc(s, y),
        pearson=pearson(s, [1.0 if v else 0.0 for v in y]),
        kendall_tau=kendall_tau(s, [1.0 if v else 0.0 for v in y]),
        f1_macro=f1,
        optimal_threshold=threshold,
        wall_clock_s=wall_clock_s,
        scorer_calls_total=scorer_calls_total,
    )

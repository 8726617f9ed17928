"""Nonconformity scores, calibration quantiles, and prediction sets.

Scores take a length-K similarity profile ``delta`` (all entries >= 0) and
a candidate label ``y``; smaller values mean the input conforms better:

* ``similarity``: ``-delta_y``;
* ``ratio``: ``-delta_y / sum(delta)``;
* ``discount``: ``-(delta_y / sum(delta)) * delta_y``;
* ``penalized``: ``-delta_y + lam * sum_{k != y} delta_k``;
* ``inverse_quantile``: softmax the profile, accumulate probabilities from
  the largest down through the candidate's rank, subtract ``u`` times the
  candidate's probability, and negate.

Calibration selects the ceil((1 - alpha) * (1 + n))-th smallest score on a
holdout set, either globally (marginal coverage) or within each label
stratum (label-conditional coverage). When the index exceeds the stratum
size the threshold is +inf and every label is included, which preserves
the coverage guarantee in tiny-calibration regimes.

Prediction sets keep the labels whose score is at or below the governing
threshold; the point-valued variant trims multi-label sets to the argmin
score and optionally resolves empty sets to the overall argmin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "SCORE_KINDS",
    "ConditionalCalibrator",
    "MarginalCalibrator",
    "PredictionSet",
    "calibrate_conditional",
    "calibrate_marginal",
    "calibration_scores",
    "inverse_quantile_score",
    "nonconformity",
    "ood_score",
    "ood_scores",
    "point_labels_from_sets",
    "predict_point",
    "predict_set_conditional",
    "predict_set_marginal",
    "quantile_index",
    "score_matrix",
    "sets_from_scores",
    "softmax",
]

SCORE_KINDS = ("similarity", "ratio", "discount", "penalized", "inverse_quantile")

_RANDOMIZED_KINDS = ("inverse_quantile",)


def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    shifted = z - z.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def _check_profiles(profiles: np.ndarray, kind: str) -> np.ndarray:
    profiles = np.atleast_2d(np.asarray(profiles, dtype=np.float64))
    if np.any(profiles < 0.0):
        raise ValueError("similarity profiles must be nonnegative")
    if kind in ("ratio", "discount") and np.any(profiles.sum(axis=1) == 0.0):
        raise ValueError(f"all-zero profile is not scoreable with kind={kind!r}")
    return profiles


def score_matrix(
    profiles: np.ndarray,
    kind: str,
    *,
    lam: float = 0.5,
    temperature: float = 1.0,
    u: np.ndarray | None = None,
) -> np.ndarray:
    """Nonconformity of every label for every profile row.

    ``profiles`` is (n, K); the result is (n, K). The randomized
    ``inverse_quantile`` kind needs one uniform draw per row in ``u``.
    """
    if kind not in SCORE_KINDS:
        raise ValueError(f"unknown score kind {kind!r}; expected one of {SCORE_KINDS}")
    profiles = _check_profiles(profiles, kind)
    if kind == "similarity":
        return -profiles
    if kind == "ratio":
        return -profiles / profiles.sum(axis=1, keepdims=True)
    if kind == "discount":
        return -(profiles / profiles.sum(axis=1, keepdims=True)) * profiles
    if kind == "penalized":
        if lam < 0.0:
            raise ValueError(f"penalized score needs lam >= 0, got {lam}")
        totals = profiles.sum(axis=1, keepdims=True)
        return -profiles + lam * (totals - profiles)
    return _inverse_quantile_matrix(profiles, u, temperature)


def _inverse_quantile_matrix(
    profiles: np.ndarray, u: np.ndarray | None, temperature: float
) -> np.ndarray:
    if temperature <= 0.0:
        raise ValueError(f"softmax temperature must be > 0, got {temperature}")
    if u is None:
        raise ValueError("inverse_quantile scoring needs one uniform draw per sample")
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if u.shape[0] != profiles.shape[0]:
        raise ValueError("need exactly one uniform draw per profile row")
    if np.any((u < 0.0) | (u > 1.0)):
        raise ValueError("uniform draws must lie in [0, 1]")

    pi = softmax(profiles / temperature, axis=1)
    # Stable argsort on -pi orders each row by descending probability with
    # ties broken toward the smaller label index.
    order = np.argsort(-pi, axis=1, kind="stable")
    sorted_pi = np.take_along_axis(pi, order, axis=1)
    cumulative = np.cumsum(sorted_pi, axis=1)
    rank = np.empty_like(order)
    np.put_along_axis(rank, order, np.arange(pi.shape[1])[None, :], axis=1)
    mass_through_label = np.take_along_axis(cumulative, rank, axis=1)
    return -(mass_through_label - u[:, None] * pi)


def nonconformity(profile: Sequence[float], y: int, kind: str, *, lam: float = 0.5) -> float:
    """Score of label ``y`` for one profile (non-randomized kinds)."""
    if kind in _RANDOMIZED_KINDS:
        raise ValueError("use inverse_quantile_score for the randomized kind")
    row = score_matrix(np.asarray(profile, dtype=np.float64)[None, :], kind, lam=lam)[0]
    return float(row[y])


def inverse_quantile_score(
    profile: Sequence[float], y: int, u: float, temperature: float = 1.0
) -> float:
    """Randomized adaptive cumulative score for label ``y``, negated.

    The softmaxed profile is accumulated from the most probable label down
    through the rank of ``y`` (ties resolved toward smaller indices); ``u``
    removes a uniform fraction of the boundary probability.
    """
    row = score_matrix(
        np.asarray(profile, dtype=np.float64)[None, :],
        "inverse_quantile",
        temperature=temperature,
        u=np.asarray([u], dtype=np.float64),
    )[0]
    return float(row[y])


def calibration_scores(
    profiles: np.ndarray,
    labels: np.ndarray,
    kind: str,
    *,
    lam: float = 0.5,
    temperature: float = 1.0,
    u: np.ndarray | None = None,
) -> np.ndarray:
    """Score of each sample's true label, one value per calibration point."""
    matrix = score_matrix(profiles, kind, lam=lam, temperature=temperature, u=u)
    labels = np.asarray(labels, dtype=np.int64)
    return matrix[np.arange(matrix.shape[0]), labels]


def quantile_index(n: int, alpha: float) -> int:
    """1-based order statistic ceil((1 - alpha) * (1 + n)).

    The product is snapped to the nearest integer when it sits within
    floating-point noise of one, so decimal alphas like 0.1 select the
    index exact rational arithmetic would.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    target = (1.0 - alpha) * (n + 1)
    nearest = round(target)
    if abs(target - nearest) <= 1e-9 * (n + 1):
        return int(nearest)
    return int(math.ceil(target))


@dataclass(frozen=True)
class MarginalCalibrator:
    """Single empirical-quantile threshold shared by all labels."""

    q_hat: float
    alpha: float
    n_cal: int

    def thresholds(self, n_classes: int) -> np.ndarray:
        return np.full(n_classes, self.q_hat)


@dataclass(frozen=True)
class ConditionalCalibrator:
    """One empirical-quantile threshold per label stratum."""

    q_hat_per_label: np.ndarray
    alpha: float
    counts: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "q_hat_per_label", np.asarray(self.q_hat_per_label, dtype=np.float64)
        )
        object.__setattr__(self, "counts", np.asarray(self.counts, dtype=np.int64))

    def thresholds(self, n_classes: int) -> np.ndarray:
        if n_classes != self.q_hat_per_label.shape[0]:
            raise ValueError("calibrator was built for a different class count")
        return self.q_hat_per_label


def _select_kth_smallest(scores: np.ndarray, k: int) -> float:
    if k > scores.shape[0]:
        return float("inf")
    return float(np.partition(scores, k - 1)[k - 1])


def calibrate_marginal(cal_scores, alpha: float) -> MarginalCalibrator:
    """Threshold at the ceil((1-alpha)(1+n))-th smallest calibration score.

    Duplicate scores count with multiplicity; when the index exceeds ``n``
    the threshold is +inf (every label will be included).
    """
    scores = np.asarray(cal_scores, dtype=np.float64).reshape(-1)
    if scores.shape[0] == 0:
        raise ValueError("calibration set must be nonempty")
    k = quantile_index(scores.shape[0], alpha)
    return MarginalCalibrator(q_hat=_select_kth_smallest(scores, k), alpha=alpha, n_cal=scores.shape[0])


def calibrate_conditional(cal_scores, cal_labels, alpha: float, n_classes: int) -> ConditionalCalibrator:
    """Marginal calibration applied within each label stratum.

    Labels absent from the calibration set get a +inf threshold.
    """
    scores = np.asarray(cal_scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(cal_labels, dtype=np.int64).reshape(-1)
    if scores.shape[0] != labels.shape[0]:
        raise ValueError("scores and labels must have equal length")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    thresholds = np.full(n_classes, np.inf)
    counts = np.zeros(n_classes, dtype=np.int64)
    for y in range(n_classes):
        stratum = scores[labels == y]
        counts[y] = stratum.shape[0]
        if stratum.shape[0] > 0:
            thresholds[y] = _select_kth_smallest(stratum, quantile_index(stratum.shape[0], alpha))
    return ConditionalCalibrator(q_hat_per_label=thresholds, alpha=alpha, counts=counts)


@dataclass(frozen=True, eq=False)
class PredictionSet:
    """A (possibly empty) subset of dense class indices with its scores."""

    labels: np.ndarray
    scores: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))
        object.__setattr__(self, "scores", np.asarray(self.scores, dtype=np.float64))

    def __len__(self) -> int:
        return self.labels.shape[0]

    def __contains__(self, label) -> bool:
        return bool(np.isin(label, self.labels))


def sets_from_scores(scores: np.ndarray, thresholds) -> np.ndarray:
    """Boolean inclusion matrix: label k enters row i iff scores[i,k] <= threshold_k."""
    scores = np.atleast_2d(scores)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if thresholds.ndim == 0:
        thresholds = np.full(scores.shape[1], float(thresholds))
    return scores <= thresholds[None, :]


def point_labels_from_sets(
    include: np.ndarray, scores: np.ndarray, allow_empty: bool
) -> np.ndarray:
    """Trim each row's set to the argmin-score member; -1 marks abstention.

    Rows with an empty set either stay empty (-1) or fall back to the
    overall argmin score when ``allow_empty`` is false. Ties break toward
    the smallest label index.
    """
    include = np.atleast_2d(include)
    scores = np.atleast_2d(scores)
    masked = np.where(include, scores, np.inf)
    picks = np.argmin(masked, axis=1)
    empty = ~include.any(axis=1)
    if allow_empty:
        picks = np.where(empty, -1, picks)
    else:
        fallback = np.argmin(scores, axis=1)
        picks = np.where(empty, fallback, picks)
    return picks


def _profile_scores(model, x, kind: str, lam: float, temperature: float, u):
    profile = model.similarity_profile(x)
    u_arr = None
    if kind in _RANDOMIZED_KINDS:
        if u is None:
            raise ValueError("inverse_quantile prediction needs a uniform draw u")
        u_arr = np.asarray([u], dtype=np.float64)
    return score_matrix(profile[None, :], kind, lam=lam, temperature=temperature, u=u_arr)[0]


def predict_set_marginal(
    model,
    calibrator: MarginalCalibrator,
    x,
    kind: str,
    *,
    lam: float = 0.5,
    temperature: float = 1.0,
    u: float | None = None,
) -> PredictionSet:
    """Labels whose nonconformity is at or below the marginal threshold."""
    scores = _profile_scores(model, x, kind, lam, temperature, u)
    members = np.flatnonzero(scores <= calibrator.q_hat)
    return PredictionSet(labels=members, scores=scores)


def predict_set_conditional(
    model,
    calibrator: ConditionalCalibrator,
    x,
    kind: str,
    *,
    lam: float = 0.5,
    temperature: float = 1.0,
    u: float | None = None,
) -> PredictionSet:
    """Labels whose nonconformity is at or below their per-label threshold."""
    scores = _profile_scores(model, x, kind, lam, temperature, u)
    members = np.flatnonzero(scores <= calibrator.thresholds(scores.shape[0]))
    return PredictionSet(labels=members, scores=scores)


def predict_point(
    model,
    calibrator,
    x,
    kind: str,
    allow_empty: bool,
    *,
    lam: float = 0.5,
    temperature: float = 1.0,
    u: float | None = None,
) -> PredictionSet:
    """Trimmed prediction: a singleton, or the empty set when allowed.

    Multi-label sets keep only the member with the smallest score; empty
    sets stay empty when ``allow_empty`` is set and otherwise fall back to
    the overall argmin score.
    """
    if isinstance(calibrator, ConditionalCalibrator):
        base = predict_set_conditional(
            model, calibrator, x, kind, lam=lam, temperature=temperature, u=u
        )
    else:
        base = predict_set_marginal(
            model, calibrator, x, kind, lam=lam, temperature=temperature, u=u
        )
    if len(base) > 1:
        best = base.labels[np.argmin(base.scores[base.labels])]
        return PredictionSet(labels=np.asarray([best]), scores=base.scores)
    if len(base) == 0 and not allow_empty:
        return PredictionSet(labels=np.asarray([np.argmin(base.scores)]), scores=base.scores)
    return base


def ood_scores(score_mat: np.ndarray) -> np.ndarray:
    """Per-row anomaly statistic: the minimum score over all labels.

    Larger values mean no class conforms; abstention triggers exactly when
    this minimum exceeds every governing threshold.
    """
    return np.atleast_2d(score_mat).min(axis=1)


def ood_score(
    model,
    x,
    kind: str,
    *,
    lam: float = 0.5,
    temperature: float = 1.0,
    u: float | None = None,
) -> float:
    """Anomaly statistic for one input: min over labels of its score."""
    scores = _profile_scores(model, x, kind, lam, temperature, u)
    return float(scores.min())

"""Experiment harness: splitting, metrics, and repeated evaluations.

A repetition draws (or re-splits) data, trains the conformal model on the
train fold only, calibrates on the calibration fold, and evaluates on the
test fold plus an out-of-distribution pool. The standard classifier
baseline trains on train + calibration combined, since it needs no
holdout. Repetition seeds derive from (master seed, repetition index), so
results are independent of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from . import datasets as _datasets
from .classifier import prototypes_from_encoded
from .conformal import (
    SCORE_KINDS,
    calibrate_conditional,
    calibrate_marginal,
    calibration_scores,
    ood_scores,
    point_labels_from_sets,
    score_matrix,
    sets_from_scores,
)
from .encoders import (
    BinaryImageEncoder,
    IdentityEncoder,
    QuantizedFeatureEncoder,
    TemporalFpeEncoder,
    TrigramTextEncoder,
)
from .hypervectors import similarity_matrix
from .synthetic import SyntheticConfig, generate_synthetic

__all__ = [
    "DEFAULT_FRACTIONS",
    "DEFAULT_OOD_HOLDOUT",
    "ExperimentConfig",
    "ExperimentResult",
    "MethodMetrics",
    "SplitSpec",
    "average_set_size",
    "empirical_coverage",
    "ood_auc",
    "point_accuracy",
    "run_experiment",
    "split_data",
]

# train / calibration / test fractions used by each benchmark
DEFAULT_FRACTIONS = {
    "synthetic": (0.40, 0.50, 0.10),
    "mnist": (0.80, 0.15, 0.05),
    "languages": (0.75, 0.225, 0.025),
    "isolet": (0.57, 0.38, 0.05),
    "spike_surrogate": (0.50, 0.40, 0.10),
}

DEFAULT_OOD_HOLDOUT = {
    "synthetic": (),
    "mnist": ("6", "7", "8", "9"),
    "isolet": ("W", "X", "Y", "Z"),
    "languages": ("Finnish", "Estonian", "Hungarian"),
    "spike_surrogate": ("run",),
}

DATASETS = tuple(DEFAULT_FRACTIONS)

METHOD_HDC = "hdc"


@dataclass(frozen=True)
class SplitSpec:
    """Fractions for train/calibration/test plus the shuffling seed."""

    fractions: Tuple[float, float, float]
    seed: object = 0

    def __post_init__(self) -> None:
        fr = tuple(float(f) for f in self.fractions)
        if len(fr) != 3 or any(f <= 0.0 for f in fr):
            raise ValueError(f"fractions must be three positive numbers, got {self.fractions}")
        if abs(sum(fr) - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1, got {self.fractions}")
        object.__setattr__(self, "fractions", fr)


def split_data(n_samples: int, spec: SplitSpec):
    """Random disjoint partition into (train, cal, test) index arrays.

    Non-train folds get floor(fraction * n) samples, bumped to at least one
    each; rounding remainders go to train. Any empty fold is an error.
    """
    if n_samples < 3:
        raise ValueError(f"need at least 3 samples to split, got {n_samples}")
    _, f_cal, f_test = spec.fractions
    n_cal = max(1, int(np.floor(f_cal * n_samples)))
    n_test = max(1, int(np.floor(f_test * n_samples)))
    n_train = n_samples - n_cal - n_test
    if n_train < 1:
        raise ValueError(
            f"fractions {spec.fractions} leave no training samples for n={n_samples}"
        )
    perm = np.random.default_rng(spec.seed).permutation(n_samples)
    return (
        perm[:n_train],
        perm[n_train : n_train + n_cal],
        perm[n_train + n_cal :],
    )


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def _as_inclusion(sets, labels=None):
    if isinstance(sets, np.ndarray) and sets.dtype == bool:
        return sets
    return None


def empirical_coverage(sets, labels) -> float:
    """Fraction of samples whose true label is in their prediction set."""
    labels = np.asarray(labels, dtype=np.int64)
    matrix = _as_inclusion(sets)
    if matrix is not None:
        if matrix.shape[0] != labels.shape[0]:
            raise ValueError("sets and labels must have equal length")
        return float(matrix[np.arange(labels.shape[0]), labels].mean())
    sets = list(sets)
    if len(sets) != labels.shape[0]:
        raise ValueError("sets and labels must have equal length")
    hits = sum(1 for s, y in zip(sets, labels) if y in s)
    return hits / len(sets)


def average_set_size(sets) -> float:
    """Mean cardinality of the prediction sets."""
    matrix = _as_inclusion(sets)
    if matrix is not None:
        if matrix.shape[0] == 0:
            raise ValueError("need at least one prediction set")
        return float(matrix.sum(axis=1).mean())
    sets = list(sets)
    if not sets:
        raise ValueError("need at least one prediction set")
    return sum(len(s) for s in sets) / len(sets)


def point_accuracy(preds, labels, count_empty_as_error: bool = True) -> float:
    """Fraction correct among size-<=1 prediction sets.

    Empty predictions count as errors when the flag is set (the default on
    inlier test data) and are skipped otherwise.
    """
    labels = np.asarray(labels, dtype=np.int64)
    preds = list(preds)
    if len(preds) != labels.shape[0]:
        raise ValueError("predictions and labels must have equal length")
    correct = 0
    considered = 0
    for s, y in zip(preds, labels):
        if len(s) > 1:
            raise ValueError("point accuracy is defined for sets of size <= 1")
        if len(s) == 0:
            if count_empty_as_error:
                considered += 1
            continue
        considered += 1
        correct += int(s.labels[0] == y)
    if considered == 0:
        raise ValueError("no predictions left to grade")
    return correct / considered


def ood_auc(inlier_scores, ood_scores_) -> float:
    """Exact pairwise P(ood > inlier) + 0.5 * P(tie) via midranks."""
    inl = np.asarray(inlier_scores, dtype=np.float64).ravel()
    ood = np.asarray(ood_scores_, dtype=np.float64).ravel()
    if inl.size == 0 or ood.size == 0:
        raise ValueError("both score lists must be nonempty")
    combined = np.concatenate([inl, ood])
    _, inverse, counts = np.unique(combined, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    midranks = ends - (counts - 1) / 2.0
    ranks = midranks[inverse]
    u = ranks[inl.size :].sum() - ood.size * (ood.size + 1) / 2.0
    return float(u / (inl.size * ood.size))


# ---------------------------------------------------------------------------
# Experiment configuration and results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = "synthetic"
    alpha: float = 0.1
    d: int = 10_000
    score_kinds: Tuple[str, ...] = SCORE_KINDS
    repetitions: int = 100
    seed: int = 0
    fractions: Tuple[float, float, float] | None = None
    ood_holdout: Tuple[str, ...] | None = None
    lam: float = 0.5
    temperature: float = 1.0
    conditional: bool = False
    levels: int = 21
    beta: float = 0.3
    # synthetic generator
    sigma3: float = 4.0
    n_per_class: Tuple[int, int, int] = (334, 333, 333)
    n_ood: int = 500
    # spike-rate surrogate generator
    spike_classes: int = 4
    spike_neurons: int = 30
    spike_bins: int = 8
    spike_per_class: int = 150
    spike_ood: int = 150
    spike_rate_scale: float = 1.2

    def validate(self) -> None:
        if self.dataset not in DATASETS:
            raise ValueError(f"dataset must be one of {DATASETS}, got {self.dataset!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        unknown = [k for k in self.score_kinds if k not in SCORE_KINDS]
        if unknown:
            raise ValueError(f"unknown score kinds {unknown}; expected a subset of {SCORE_KINDS}")
        if self.lam < 0.0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if self.temperature <= 0.0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")
        if self.fractions is not None:
            SplitSpec(self.fractions)  # reuse its validation

    def resolved_fractions(self) -> Tuple[float, float, float]:
        return self.fractions if self.fractions is not None else DEFAULT_FRACTIONS[self.dataset]

    def resolved_holdout(self) -> Tuple[str, ...]:
        if self.ood_holdout is not None:
            return tuple(str(v) for v in self.ood_holdout)
        return DEFAULT_OOD_HOLDOUT[self.dataset]


@dataclass
class MethodMetrics:
    """Aggregated per-method metrics (means with standard errors)."""

    method: str
    coverage: float
    coverage_se: float
    size: float
    size_se: float
    accuracy: float
    accuracy_se: float
    auc: float
    auc_se: float
    minscore_auc: float = float("nan")
    empty_rate: float = float("nan")
    ood_empty_rate: float = float("nan")
    label_coverage: np.ndarray | None = None
    label_coverage_se: np.ndarray | None = None
    label_upper_slack: np.ndarray | None = None


@dataclass
class ExperimentResult:
    dataset: str
    alpha: float
    repetitions: int
    seed: int
    label_names: List[str]
    methods: List[MethodMetrics]
    config: Dict[str, object]


# ---------------------------------------------------------------------------
# Per-dataset recipes
# ---------------------------------------------------------------------------


def _holdout_partition(bundle, holdout_names: Tuple[str, ...]):
    names = [str(n) for n in bundle.label_names]
    held = {n for n in holdout_names}
    unknown = held - set(names)
    if unknown:
        raise ValueError(f"ood_holdout labels {sorted(unknown)} not present in {names}")
    held_ids = {i for i, n in enumerate(names) if n in held}
    labels = np.asarray(bundle.labels)
    ood_mask = np.isin(labels, sorted(held_ids))
    kept_ids = [i for i in range(len(names)) if i not in held_ids]
    remap = {old: new for new, old in enumerate(kept_ids)}
    in_features = _take(bundle.features, ~ood_mask)
    in_labels = np.array([remap[int(y)] for y in labels[~ood_mask]], dtype=np.int64)
    ood_features = _take(bundle.features, ood_mask)
    kept_names = [names[i] for i in kept_ids]
    return in_features, in_labels, ood_features, kept_names


def _take(features, mask):
    arr = np.asarray(features) if not isinstance(features, np.ndarray) else features
    return arr[mask]


def _rep_seed_parts(master_seed: int, rep: int):
    root = np.random.SeedSequence(entropy=(int(master_seed), int(rep)))
    return root.spawn(4)  # data, split, encoder, randomization


def _build_encoder(config: ExperimentConfig, features, train_idx, enc_seed):
    ds = config.dataset
    if ds == "synthetic":
        return IdentityEncoder(p=np.asarray(features).shape[1])
    if ds == "mnist":
        return BinaryImageEncoder(p=np.asarray(features).shape[1], d=config.d, seed=enc_seed)
    if ds == "isolet":
        enc = QuantizedFeatureEncoder(
            p=np.asarray(features).shape[1], d=config.d, levels=config.levels, seed=enc_seed
        )
        enc.fit(np.asarray(features)[train_idx])
        return enc
    if ds == "languages":
        return TrigramTextEncoder(d=config.d, seed=enc_seed)
    if ds == "spike_surrogate":
        arr = np.asarray(features)
        return TemporalFpeEncoder(
            p=arr.shape[1], d=config.d, t_max=arr.shape[2], beta=config.beta, seed=enc_seed
        )
    raise ValueError(f"no encoder recipe for dataset {ds!r}")


_RECIPE_STYLE = {
    "synthetic": ("centroid", "inverse_euclidean"),
    "mnist": ("binarized", "cosine_normalized"),
    "isolet": ("binarized", "cosine_normalized"),
    "languages": ("l2_normalized_real", "cosine_normalized"),
    "spike_surrogate": ("raw_complex", "complex_cosine"),
}


def _rep_data(config: ExperimentConfig, fixed, data_seed):
    """Features, dense labels, OOD pool, and label names for one repetition."""
    if config.dataset == "synthetic":
        cfg = SyntheticConfig(
            sigma=(1.0, 2.0, config.sigma3),
            n_per_class=config.n_per_class,
            n_ood=config.n_ood,
            seed=data_seed,
        )
        feats, labels, ood = generate_synthetic(cfg)
        return feats, labels, ood, ["1", "2", "3"]
    if config.dataset == "spike_surrogate":
        bundle = _datasets.generate_spike_surrogate(
            _datasets.SpikeSurrogateConfig(
                n_classes=config.spike_classes,
                n_neurons=config.spike_neurons,
                n_bins=config.spike_bins,
                n_per_class=config.spike_per_class,
                n_ood=config.spike_ood,
                rate_scale=config.spike_rate_scale,
                seed=data_seed,
            )
        )
        return _holdout_partition(bundle, config.resolved_holdout())
    return fixed


def _aggregate(values: List[float]) -> Tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    finite = np.isfinite(arr)
    if arr.size == 0 or not finite.any():
        return float("nan"), 0.0
    kept = arr[finite]
    se = float(kept.std(ddof=1) / np.sqrt(kept.size)) if kept.size > 1 else 0.0
    return float(kept.mean()), se


def run_experiment(config: ExperimentConfig, bundle=None) -> ExperimentResult:
    """Repeat split/train/calibrate/evaluate and aggregate the metrics.

    Real datasets require an ingested ``bundle``; the synthetic and
    spike-surrogate benchmarks draw fresh data each repetition. Each
    repetition's metrics feed mean and standard-error aggregates per
    method (the baseline plus one row per requested score kind).
    """
    config.validate()
    fractions = config.resolved_fractions()

    fixed = None
    if config.dataset in ("mnist", "isolet", "languages"):
        if bundle is None:
            raise ValueError(f"dataset {config.dataset!r} requires an ingested data bundle")
        fixed = _holdout_partition(bundle, config.resolved_holdout())

    methods = [METHOD_HDC] + list(config.score_kinds)
    per_rep: Dict[str, List[dict]] = {m: [] for m in methods}
    label_names: List[str] = []

    for rep in range(config.repetitions):
        data_ss, split_ss, enc_ss, u_ss = _rep_seed_parts(config.seed, rep)
        feats, labels, ood_feats, label_names = _rep_data(config, fixed, data_ss)
        rep_metrics = _evaluate_repetition(
            config, fractions, feats, labels, ood_feats, split_ss, enc_ss, u_ss
        )
        for m in methods:
            per_rep[m].append(rep_metrics[m])

    rows = []
    for m in methods:
        reps = per_rep[m]
        cov, cov_se = _aggregate([r["coverage"] for r in reps])
        size, size_se = _aggregate([r["size"] for r in reps])
        acc, acc_se = _aggregate([r["accuracy"] for r in reps])
        auc, auc_se = _aggregate([r["auc"] for r in reps])
        minscore_auc, _ = _aggregate([r["minscore_auc"] for r in reps])
        empty, _ = _aggregate([r["empty_rate"] for r in reps])
        ood_empty, _ = _aggregate([r["ood_empty_rate"] for r in reps])
        label_cov = label_cov_se = slack = None
        if config.conditional and reps and reps[0]["label_coverage"] is not None:
            stacked = np.vstack([r["label_coverage"] for r in reps])
            label_cov = np.nanmean(stacked, axis=0)
            counts = np.isfinite(stacked).sum(axis=0)
            label_cov_se = np.nanstd(stacked, ddof=1, axis=0) / np.sqrt(np.maximum(counts, 1))
            slack = np.vstack([r["label_upper_slack"] for r in reps]).mean(axis=0)
        rows.append(
            MethodMetrics(
                method=m,
                coverage=cov,
                coverage_se=cov_se,
                size=size,
                size_se=size_se,
                accuracy=acc,
                accuracy_se=acc_se,
                auc=auc,
                auc_se=auc_se,
                minscore_auc=minscore_auc,
                empty_rate=empty,
                ood_empty_rate=ood_empty,
                label_coverage=label_cov,
                label_coverage_se=label_cov_se,
                label_upper_slack=slack,
            )
        )

    echo = {
        "dataset": config.dataset,
        "alpha": config.alpha,
        "d": config.d,
        "score_kinds": list(config.score_kinds),
        "repetitions": config.repetitions,
        "seed": config.seed,
        "fractions": list(fractions),
        "ood_holdout": list(config.resolved_holdout()),
        "lam": config.lam,
        "temperature": config.temperature,
        "conditional": config.conditional,
    }
    if config.dataset == "synthetic":
        echo.update(
            sigma3=config.sigma3, n_per_class=list(config.n_per_class), n_ood=config.n_ood
        )

    return ExperimentResult(
        dataset=config.dataset,
        alpha=config.alpha,
        repetitions=config.repetitions,
        seed=config.seed,
        label_names=list(label_names),
        methods=rows,
        config=echo,
    )


def _evaluate_repetition(
    config: ExperimentConfig, fractions, feats, labels, ood_feats, split_ss, enc_ss, u_ss
) -> Dict[str, dict]:
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.shape[0]
    n_classes = int(labels.max()) + 1
    train_idx, cal_idx, test_idx = split_data(n, SplitSpec(fractions, seed=split_ss))

    encoder = _build_encoder(config, feats, train_idx, enc_ss)
    style, sim_kind = _RECIPE_STYLE[config.dataset]

    encoded = encoder.encode_batch(feats)
    encoded_ood = encoder.encode_batch(ood_feats) if len(ood_feats) else None

    protos_train = prototypes_from_encoded(encoded[train_idx], labels[train_idx], n_classes, style)
    full_idx = np.concatenate([train_idx, cal_idx])
    protos_full = prototypes_from_encoded(encoded[full_idx], labels[full_idx], n_classes, style)

    prof_cal = similarity_matrix(encoded[cal_idx], protos_train, sim_kind)
    prof_test = similarity_matrix(encoded[test_idx], protos_train, sim_kind)
    prof_ood = (
        similarity_matrix(encoded_ood, protos_train, sim_kind)
        if encoded_ood is not None
        else None
    )
    y_cal = labels[cal_idx]
    y_test = labels[test_idx]

    u_rng = np.random.default_rng(u_ss)
    u_cal = u_rng.uniform(size=prof_cal.shape[0])
    u_test = u_rng.uniform(size=prof_test.shape[0])
    u_ood = u_rng.uniform(size=prof_ood.shape[0]) if prof_ood is not None else None

    out: Dict[str, dict] = {}

    # Baseline: top-1 prediction from prototypes built on train + calibration.
    prof_full_test = similarity_matrix(encoded[test_idx], protos_full, sim_kind)
    baseline_acc = float((np.argmax(prof_full_test, axis=1) == y_test).mean())
    out[METHOD_HDC] = {
        "coverage": baseline_acc,
        "size": 1.0,
        "accuracy": baseline_acc,
        "auc": float("nan"),
        "minscore_auc": float("nan"),
        "empty_rate": 0.0,
        "ood_empty_rate": float("nan"),
        "label_coverage": None,
        "label_upper_slack": None,
    }

    for kind in config.score_kinds:
        kw = dict(lam=config.lam, temperature=config.temperature)
        cal_scores = calibration_scores(prof_cal, y_cal, kind, u=u_cal, **kw)
        if config.conditional:
            calibrator = calibrate_conditional(cal_scores, y_cal, config.alpha, n_classes)
        else:
            calibrator = calibrate_marginal(cal_scores, config.alpha)
        thresholds = calibrator.thresholds(n_classes)

        test_scores = score_matrix(prof_test, kind, u=u_test, **kw)
        include = sets_from_scores(test_scores, thresholds)
        sizes = include.sum(axis=1)
        coverage = float(include[np.arange(y_test.shape[0]), y_test].mean())
        picks = point_labels_from_sets(include, test_scores, allow_empty=False)
        accuracy = float((picks == y_test).mean())

        auc = float("nan")
        minscore_auc = float("nan")
        ood_empty_rate = float("nan")
        if prof_ood is not None and prof_ood.shape[0] > 0:
            ood_mat = score_matrix(prof_ood, kind, u=u_ood, **kw)
            ood_abstain = ~sets_from_scores(ood_mat, thresholds).any(axis=1)
            test_abstain = sizes == 0
            # The reported AUC ranks inputs by whether the method abstains
            # on them at this alpha; the raw min-score statistic is kept
            # alongside for diagnostics.
            auc = ood_auc(test_abstain.astype(np.float64), ood_abstain.astype(np.float64))
            minscore_auc = ood_auc(ood_scores(test_scores), ood_scores(ood_mat))
            ood_empty_rate = float(ood_abstain.mean())

        label_coverage = None
        label_upper_slack = None
        if config.conditional:
            label_coverage = np.full(n_classes, np.nan)
            for y in range(n_classes):
                mask = y_test == y
                if mask.any():
                    label_coverage[y] = float(include[mask, y].mean())
            label_upper_slack = 1.0 / (1.0 + calibrator.counts.astype(np.float64))

        out[kind] = {
            "coverage": coverage,
            "size": float(sizes.mean()),
            "accuracy": accuracy,
            "auc": auc,
            "minscore_auc": minscore_auc,
            "empty_rate": float((sizes == 0).mean()),
            "ood_empty_rate": ood_empty_rate,
            "label_coverage": label_coverage,
            "label_upper_slack": label_upper_slack,
        }
    return out

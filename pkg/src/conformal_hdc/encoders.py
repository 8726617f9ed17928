"""Encoders mapping raw inputs into hypervector space.

Four schemes cover the supported modalities, plus an identity passthrough
for feature-space experiments:

* binary images: bundle a fixed random position vector per active pixel;
* quantized real features: bind a per-feature identity vector with a
  correlated level vector and bundle across features;
* character trigrams: bind permuted symbol vectors over a 27-symbol
  vocabulary (a-z and space) and bundle all trigrams;
* temporal trajectories: fractional-power encoding of each time bin,
  bound to a rotated positional phasor and superposed.

Every encoder is deterministic given its seed and immutable once fitted,
so encoding calls are pure and may run concurrently.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .hypervectors import (
    TWO_PI,
    BipolarHypervector,
    ComplexAccumulator,
    ComplexHypervector,
    RealAccumulator,
    random_phase,
    sign_binarize,
)

__all__ = [
    "TEXT_VOCABULARY",
    "BinaryImageEncoder",
    "FpeProjection",
    "IdentityEncoder",
    "ItemMemory",
    "LevelMemory",
    "PositionBank",
    "QuantizationGrid",
    "QuantizedFeatureEncoder",
    "TemporalFpeEncoder",
    "TrigramTextEncoder",
    "encode_fpe",
    "encode_identity",
    "encode_image_binary",
    "encode_quantized_features",
    "encode_temporal_trajectory",
    "encode_trigram_text",
    "preprocess_text",
]

#: 26 Latin letters plus the space token.
TEXT_VOCABULARY = "abcdefghijklmnopqrstuvwxyz "

MAX_TEXT_LENGTH = 128


def _spawn_seeds(seed, n: int):
    if isinstance(seed, np.random.SeedSequence):
        return seed.spawn(n)
    return np.random.SeedSequence(seed).spawn(n)


class ItemMemory:
    """Fixed random bipolar codebook: one vector per item index."""

    def __init__(self, n_items: int, d: int, seed) -> None:
        if n_items < 1:
            raise ValueError(f"item memory needs at least one item, got {n_items}")
        if d < 1:
            raise ValueError(f"dimension must be >= 1, got {d}")
        rng = np.random.default_rng(seed)
        vectors = rng.integers(0, 2, size=(n_items, d), dtype=np.int8) * 2 - 1
        vectors.setflags(write=False)
        self.vectors = vectors
        self.d = d
        self.n_items = n_items
        self.seed = seed

    def __len__(self) -> int:
        return self.n_items

    def __getitem__(self, index: int) -> BipolarHypervector:
        return BipolarHypervector(self.vectors[index])


class LevelMemory:
    """Correlated level vectors for quantized magnitudes.

    Level 0 is random; each subsequent level flips ``floor(d / (2*(L-1)))``
    fresh positions, drawn from a single global permutation so the flip
    sets of different steps never overlap. The Hamming distance between
    levels u and v is then exactly ``flip_step * |u - v|``.
    """

    def __init__(self, d: int, levels: int = 21, seed=None) -> None:
        if levels < 2:
            raise ValueError(f"level memory needs at least 2 levels, got {levels}")
        if d < 1:
            raise ValueError(f"dimension must be >= 1, got {d}")
        rng = np.random.default_rng(seed)
        self.flip_step = d // (2 * (levels - 1))
        base = (rng.integers(0, 2, size=d, dtype=np.int8) * 2 - 1)
        perm = rng.permutation(d)
        vectors = np.empty((levels, d), dtype=np.int8)
        vectors[0] = base
        for v in range(1, levels):
            vectors[v] = vectors[v - 1]
            flip = perm[(v - 1) * self.flip_step : v * self.flip_step]
            vectors[v, flip] *= -1
        vectors.setflags(write=False)
        self.vectors = vectors
        self.d = d
        self.levels = levels
        self.seed = seed

    def __getitem__(self, level: int) -> BipolarHypervector:
        return BipolarHypervector(self.vectors[level])


@dataclass(frozen=True)
class QuantizationGrid:
    """Per-feature linear bins learned from training data."""

    mins: np.ndarray
    maxs: np.ndarray
    levels: int

    def __post_init__(self) -> None:
        mins = np.asarray(self.mins, dtype=np.float64)
        maxs = np.asarray(self.maxs, dtype=np.float64)
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise ValueError("grid mins/maxs must be 1-d arrays of equal length")
        if np.any(maxs < mins):
            raise ValueError("grid requires min <= max per feature")
        if self.levels < 1:
            raise ValueError("grid needs at least one level")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    @classmethod
    def fit(cls, X: np.ndarray, levels: int) -> "QuantizationGrid":
        X = np.asarray(X, dtype=np.float64)
        return cls(mins=X.min(axis=0), maxs=X.max(axis=0), levels=levels)

    def quantize(self, X: np.ndarray) -> np.ndarray:
        """Map reals to integer levels in {0, ..., levels-1}, clipping overflow."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        span = self.maxs - self.mins
        safe = np.where(span > 0.0, span, 1.0)
        idx = np.floor((X - self.mins) / safe * self.levels).astype(np.int64)
        idx[:, span == 0.0] = 0
        return np.clip(idx, 0, self.levels - 1)


class FpeProjection:
    """Gaussian random projection for fractional-power encoding.

    Rows of ``W`` are standard normal draws; an input ``x`` maps to phases
    ``beta * W @ x``, so the expected complex cosine of two encodings
    approximates the RBF kernel exp(-beta^2 * ||x - x'||^2 / 2).
    """

    def __init__(self, p: int, d: int, beta: float = 0.3, seed=None) -> None:
        if p < 1 or d < 1:
            raise ValueError("projection needs p >= 1 and d >= 1")
        if beta <= 0.0:
            raise ValueError(f"fractional power factor must be > 0, got {beta}")
        rng = np.random.default_rng(seed)
        W = rng.standard_normal((d, p))
        W.setflags(write=False)
        self.W = W
        self.p = p
        self.d = d
        self.beta = beta
        self.seed = seed

    def phases(self, X: np.ndarray) -> np.ndarray:
        """Phases beta * W x for one sample (p,) or a batch (n, p)."""
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.p:
            raise ValueError(f"expected {self.p} features, got {X.shape[-1]}")
        return np.mod(self.beta * (X @ self.W.T), TWO_PI)


class PositionBank:
    """Positional phasor for temporal binding: bin j uses rotation j of P."""

    def __init__(self, d: int, t_max: int, seed=None) -> None:
        if t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {t_max}")
        self.base = random_phase(d, seed)
        self.d = d
        self.t_max = t_max
        self.seed = seed

    def phases_for_bin(self, j: int) -> np.ndarray:
        """Phases of the rotated indicator for 1-indexed time bin ``j``."""
        if not 1 <= j <= self.t_max:
            raise ValueError(f"time bin {j} outside [1, {self.t_max}]")
        return np.roll(self.base.phases, j % self.d)


def encode_image_binary(pixels, im: ItemMemory) -> BipolarHypervector:
    """Bundle position vectors of active pixels and binarize.

    An all-zero image has an empty bundle, which the zero tie-break turns
    into the all-(+1) vector.
    """
    x = np.asarray(pixels)
    if x.ndim != 1 or x.shape[0] != im.n_items:
        raise ValueError(f"expected {im.n_items} pixels, got shape {x.shape}")
    if not np.all((x == 0) | (x == 1)):
        raise ValueError("pixels must be binary (threshold upstream)")
    total = x.astype(np.float64) @ im.vectors
    return sign_binarize(RealAccumulator(total))


def encode_quantized_features(
    x, grid: QuantizationGrid, im: ItemMemory, lm: LevelMemory
) -> BipolarHypervector:
    """Identification-value chain encoding: sign(sum_j ID_j * L_{v_j})."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != im.n_items:
        raise ValueError(f"expected {im.n_items} features, got shape {x.shape}")
    if grid.mins.shape[0] != x.shape[0]:
        raise ValueError("grid was fitted for a different feature count")
    levels = grid.quantize(x)[0]
    bound = im.vectors * lm.vectors[levels]
    return sign_binarize(RealAccumulator(bound.sum(axis=0, dtype=np.float64)))


def preprocess_text(text: str) -> str:
    """Lowercase, collapse whitespace, and truncate to 128 characters."""
    collapsed = re.sub(r"\s+", " ", text.lower()).strip()
    return collapsed[:MAX_TEXT_LENGTH]


def _vocabulary_indices(text: str) -> np.ndarray:
    table = {c: i for i, c in enumerate(TEXT_VOCABULARY)}
    return np.array([table[c] for c in text if c in table], dtype=np.int64)


def encode_trigram_text(text: str, im: ItemMemory) -> BipolarHypervector:
    """Superpose all character trigrams S_t * rho(S_{t+1}) * rho^2(S_{t+2}).

    Characters outside the vocabulary are dropped before trigrams form;
    strings with fewer than three valid symbols yield the all-(+1) vector
    (empty bundle).
    """
    if im.n_items != len(TEXT_VOCABULARY):
        raise ValueError(f"text item memory needs {len(TEXT_VOCABULARY)} symbols")
    idx = _vocabulary_indices(text)
    if idx.shape[0] < 3:
        return sign_binarize(RealAccumulator(np.zeros(im.d)))
    rows = im.vectors[idx]
    r1 = np.roll(rows, 1, axis=1)
    r2 = np.roll(rows, 2, axis=1)
    grams = rows[:-2] * r1[1:-1] * r2[2:]
    return sign_binarize(RealAccumulator(grams.sum(axis=0, dtype=np.float64)))


def encode_fpe(x, proj: FpeProjection) -> ComplexHypervector:
    """Fractional-power encoding: phases beta * W x on the unit circle."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("encode_fpe takes a single feature vector")
    return ComplexHypervector(proj.phases(x))


def encode_temporal_trajectory(
    X, proj: FpeProjection, bank: PositionBank
) -> ComplexAccumulator:
    """Superpose per-bin encodings bound to rotated positional phasors.

    ``X`` has shape (p, t) with one column per time bin; the result is the
    raw complex sum over bins j of exp(i * (beta W X[:, j])) * rho^j(P),
    left unnormalized.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != proj.p:
        raise ValueError(f"expected a ({proj.p}, t) matrix, got shape {X.shape}")
    t = X.shape[1]
    if t == 0:
        raise ValueError("trajectory must contain at least one time bin")
    if t > bank.t_max:
        raise ValueError(f"trajectory length {t} exceeds t_max {bank.t_max}")
    feature_phases = proj.phases(X.T)  # (t, d)
    total = np.zeros(proj.d, dtype=np.complex128)
    for j in range(1, t + 1):
        total += np.exp(1j * (feature_phases[j - 1] + bank.phases_for_bin(j)))
    return ComplexAccumulator(total)


def encode_identity(x) -> RealAccumulator:
    """Passthrough of raw features for feature-space studies."""
    return RealAccumulator(np.asarray(x, dtype=np.float64))


# ---------------------------------------------------------------------------
# Encoder objects: hold the fitted state, expose batch encoding for training.
# ---------------------------------------------------------------------------


class IdentityEncoder:
    """Raw features used directly as accumulators."""

    representation = "real"
    sample_ndim = 1

    def __init__(self, p: int) -> None:
        self.p = p
        self.d = p

    def encode(self, x) -> RealAccumulator:
        return encode_identity(x)

    def encode_batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.p:
            raise ValueError(f"expected {self.p} features, got {X.shape[1]}")
        return X

    def state(self) -> dict:
        return {"type": "identity", "p": self.p}


class BinaryImageEncoder:
    """Position-bundling encoder for binary images."""

    representation = "bipolar"
    sample_ndim = 1

    def __init__(self, p: int, d: int, seed) -> None:
        self.im = ItemMemory(p, d, seed)
        self.p = p
        self.d = d
        self.seed = seed

    def encode(self, pixels) -> BipolarHypervector:
        return encode_image_binary(pixels, self.im)

    def encode_batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X))
        if X.shape[1] != self.p:
            raise ValueError(f"expected {self.p} pixels, got {X.shape[1]}")
        if not np.all((X == 0) | (X == 1)):
            raise ValueError("pixels must be binary (threshold upstream)")
        sums = X.astype(np.float32) @ self.im.vectors.astype(np.float32)
        return np.where(sums >= 0, 1, -1).astype(np.int8)

    def state(self) -> dict:
        return {"type": "binary_image", "p": self.p, "d": self.d, "seed": self.seed}


class QuantizedFeatureEncoder:
    """Identification-value chain encoder for real-valued feature tables."""

    representation = "bipolar"
    sample_ndim = 1

    def __init__(self, p: int, d: int, levels: int = 21, seed=None) -> None:
        id_seed, level_seed = _spawn_seeds(seed, 2)
        self.im = ItemMemory(p, d, id_seed)
        self.lm = LevelMemory(d, levels, level_seed)
        self.grid: QuantizationGrid | None = None
        self.p = p
        self.d = d
        self.levels = levels
        self.seed = seed

    def fit(self, X) -> "QuantizedFeatureEncoder":
        self.grid = QuantizationGrid.fit(np.asarray(X, dtype=np.float64), self.levels)
        return self

    def _require_fitted(self) -> QuantizationGrid:
        if self.grid is None:
            raise RuntimeError("encoder not fitted: call fit(train_features) first")
        return self.grid

    def encode(self, x) -> BipolarHypervector:
        return encode_quantized_features(x, self._require_fitted(), self.im, self.lm)

    def encode_batch(self, X) -> np.ndarray:
        grid = self._require_fitted()
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.p:
            raise ValueError(f"expected {self.p} features, got {X.shape[1]}")
        levels = grid.quantize(X)
        acc = np.zeros((X.shape[0], self.d), dtype=np.float32)
        ids = self.im.vectors.astype(np.float32)
        lvls = self.lm.vectors.astype(np.float32)
        for j in range(self.p):
            acc += ids[j] * lvls[levels[:, j]]
        return np.where(acc >= 0, 1, -1).astype(np.int8)

    def state(self) -> dict:
        grid = self.grid
        return {
            "type": "quantized_features",
            "p": self.p,
            "d": self.d,
            "levels": self.levels,
            "seed": self.seed,
            "grid_mins": None if grid is None else grid.mins,
            "grid_maxs": None if grid is None else grid.maxs,
        }


class TrigramTextEncoder:
    """Character-trigram encoder over the 27-symbol vocabulary."""

    representation = "bipolar"
    sample_ndim = 1

    def __init__(self, d: int, seed=None) -> None:
        self.im = ItemMemory(len(TEXT_VOCABULARY), d, seed)
        self.d = d
        self.seed = seed

    def encode(self, text: str) -> BipolarHypervector:
        return encode_trigram_text(text, self.im)

    def encode_batch(self, texts: Iterable[str]) -> np.ndarray:
        rows = [encode_trigram_text(t, self.im).elements for t in texts]
        if not rows:
            raise ValueError("cannot encode an empty batch of texts")
        return np.stack(rows)

    def state(self) -> dict:
        return {"type": "trigram_text", "d": self.d, "seed": self.seed}


class TemporalFpeEncoder:
    """Fractional-power encoder of (neurons x time-bins) trajectories."""

    representation = "complex"
    sample_ndim = 2

    def __init__(self, p: int, d: int, t_max: int, beta: float = 0.3, seed=None) -> None:
        proj_seed, bank_seed = _spawn_seeds(seed, 2)
        self.proj = FpeProjection(p, d, beta, proj_seed)
        self.bank = PositionBank(d, t_max, bank_seed)
        self.p = p
        self.d = d
        self.t_max = t_max
        self.beta = beta
        self.seed = seed

    def encode(self, X) -> ComplexAccumulator:
        return encode_temporal_trajectory(X, self.proj, self.bank)

    def encode_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 3 or X.shape[1] != self.p:
            raise ValueError(f"expected (n, {self.p}, t) trajectories, got shape {X.shape}")
        t = X.shape[2]
        if t == 0:
            raise ValueError("trajectories must contain at least one time bin")
        if t > self.t_max:
            raise ValueError(f"trajectory length {t} exceeds t_max {self.t_max}")
        out = np.zeros((X.shape[0], self.d), dtype=np.complex128)
        for j in range(1, t + 1):
            phases = self.proj.phases(X[:, :, j - 1]) + self.bank.phases_for_bin(j)
            out += np.exp(1j * phases)
        return out

    def state(self) -> dict:
        return {
            "type": "temporal_fpe",
            "p": self.p,
            "d": self.d,
            "t_max": self.t_max,
            "beta": self.beta,
            "seed": self.seed,
        }

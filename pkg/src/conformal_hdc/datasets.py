"""Dataset ingestion and the synthetic spike-rate surrogate.

Ingestion returns a :class:`DatasetBundle`: features, dense integer
labels, the human-readable label names, and provenance (source paths and
SHA-256 checksums). Parsers validate aggressively and fail with the file
and record that broke.
"""

from __future__ import annotations

import gzip
import hashlib
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

import numpy as np

from .encoders import preprocess_text

__all__ = [
    "DatasetBundle",
    "DatasetError",
    "SpikeSurrogateConfig",
    "generate_spike_surrogate",
    "ingest_isolet",
    "ingest_languages",
    "ingest_mnist",
]

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801

ISOLET_FEATURES = 617


class DatasetError(ValueError):
    """Raised when an input file fails structural validation."""


@dataclass
class DatasetBundle:
    """Features plus dense labels and their original names."""

    features: np.ndarray
    labels: np.ndarray
    label_names: List[str]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.features) != self.labels.shape[0]:
            raise DatasetError("feature and label counts differ")

    @property
    def n_samples(self) -> int:
        return self.labels.shape[0]


def _read_binary(path) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def ingest_mnist(images_path, labels_path) -> DatasetBundle:
    """Parse the big-endian IDX image/label pair into binary pixel vectors.

    Pixels scale to [0, 1] and binarize at 0.5; images flatten to length
    rows*cols. Gzipped files are accepted transparently.
    """
    img_raw = _read_binary(images_path)
    if len(img_raw) < 16:
        raise DatasetError(f"{images_path}: truncated IDX header")
    magic, n_images, n_rows, n_cols = struct.unpack(">IIII", img_raw[:16])
    if magic != IDX_IMAGE_MAGIC:
        raise DatasetError(
            f"{images_path}: bad magic number 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x}"
        )
    expected = n_images * n_rows * n_cols
    body = img_raw[16:]
    if len(body) != expected:
        raise DatasetError(
            f"{images_path}: header declares {n_images} images "
            f"({expected} bytes) but file holds {len(body)}"
        )

    lbl_raw = _read_binary(labels_path)
    if len(lbl_raw) < 8:
        raise DatasetError(f"{labels_path}: truncated IDX header")
    magic, n_labels = struct.unpack(">II", lbl_raw[:8])
    if magic != IDX_LABEL_MAGIC:
        raise DatasetError(
            f"{labels_path}: bad magic number 0x{magic:08x}, expected 0x{IDX_LABEL_MAGIC:08x}"
        )
    if len(lbl_raw) - 8 != n_labels:
        raise DatasetError(
            f"{labels_path}: header declares {n_labels} labels but file holds {len(lbl_raw) - 8}"
        )
    if n_labels != n_images:
        raise DatasetError(
            f"image/label count mismatch: {n_images} images vs {n_labels} labels"
        )

    pixels = np.frombuffer(body, dtype=np.uint8).reshape(n_images, n_rows * n_cols)
    binary = (pixels / 255.0 > 0.5).astype(np.uint8)
    labels = np.frombuffer(lbl_raw[8:], dtype=np.uint8).astype(np.int64)
    return DatasetBundle(
        features=binary,
        labels=labels,
        label_names=[str(digit) for digit in range(10)],
        provenance={
            "images": str(images_path),
            "labels": str(labels_path),
            "images_sha256": _sha256(images_path),
            "labels_sha256": _sha256(labels_path),
        },
    )


def ingest_isolet(path) -> DatasetBundle:
    """Parse the 617-feature spoken-letter table (comma-delimited, label last).

    Labels 1..26 map to letters A..Z; rows with the wrong column count or
    unparseable values are reported with their line number.
    """
    feats: List[np.ndarray] = []
    labels: List[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip().rstrip(".")
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != ISOLET_FEATURES + 1:
                raise DatasetError(
                    f"{path}: row {lineno} has {len(parts)} columns, "
                    f"expected {ISOLET_FEATURES + 1}"
                )
            try:
                values = np.array([float(p) for p in parts], dtype=np.float64)
            except ValueError as exc:
                raise DatasetError(f"{path}: row {lineno}: {exc}") from exc
            label = int(values[-1])
            if not 1 <= label <= 26 or values[-1] != label:
                raise DatasetError(
                    f"{path}: row {lineno}: label {values[-1]} outside 1..26"
                )
            feats.append(values[:-1])
            labels.append(label - 1)
    if not feats:
        raise DatasetError(f"{path}: no data rows found")
    return DatasetBundle(
        features=np.vstack(feats),
        labels=np.asarray(labels, dtype=np.int64),
        label_names=[chr(ord("A") + i) for i in range(26)],
        provenance={"table": str(path), "table_sha256": _sha256(path)},
    )


def ingest_languages(directory) -> DatasetBundle:
    """Load per-language text samples from a directory.

    Accepts either one ``<language>.txt`` file per language or one
    subdirectory per language containing ``*.txt`` files; each nonempty
    line is a sample. Lines are lowercased, whitespace-collapsed, and
    truncated to 128 characters. A language with no usable samples is an
    error.
    """
    root = Path(directory)
    if not root.is_dir():
        raise DatasetError(f"{directory}: not a directory")
    sources: dict[str, List[Path]] = {}
    for entry in sorted(root.iterdir()):
        if entry.is_dir():
            files = sorted(entry.glob("*.txt"))
            sources[entry.name] = files
        elif entry.suffix == ".txt":
            sources[entry.stem] = [entry]
    if not sources:
        raise DatasetError(f"{directory}: no per-language files or subdirectories found")

    texts: List[str] = []
    labels: List[int] = []
    names = sorted(sources)
    checks = {}
    for idx, name in enumerate(names):
        count = 0
        for file in sources[name]:
            checks[str(file)] = _sha256(file)
            for line in file.read_text(encoding="utf-8").splitlines():
                cleaned = preprocess_text(line)
                if cleaned:
                    texts.append(cleaned)
                    labels.append(idx)
                    count += 1
        if count == 0:
            raise DatasetError(f"language {name!r} has no usable text samples")
    return DatasetBundle(
        features=np.array(texts, dtype=object),
        labels=np.asarray(labels, dtype=np.int64),
        label_names=names,
        provenance={"directory": str(root), "files_sha256": checks},
    )


@dataclass(frozen=True)
class SpikeSurrogateConfig:
    """Poisson spike-count surrogate mirroring odor-vs-run decoding.

    Each class has a (neurons x bins) firing-rate profile; samples are
    independent Poisson counts around it. A distinct "run" profile plays
    the out-of-distribution behavioral state.
    """

    n_classes: int = 4
    n_neurons: int = 30
    n_bins: int = 8
    n_per_class: int = 150
    n_ood: int = 150
    #: peak class-specific modulation in spikes per bin; the fractional-power
    #: encoder's kernel bandwidth (beta = 0.3) suits sparse per-bin counts,
    #: so rates are parameterized at spikes-per-bin scale.
    rate_scale: float = 1.2
    base_rate: float = 0.05
    seed: int = 0
    rate_profiles: np.ndarray | None = None  # (n_classes, neurons, bins)
    ood_rate_profile: np.ndarray | None = None  # (neurons, bins)


def generate_spike_surrogate(cfg: SpikeSurrogateConfig) -> DatasetBundle:
    """Draw Poisson spike-count trajectories with class-specific rates.

    Returns a bundle whose last class is the "run" state, intended to be
    held out as OOD. Profiles may be supplied explicitly; otherwise each
    class modulates a random subset of neurons. Negative rates are
    rejected; zero rates are allowed and produce all-zero counts.
    """
    if cfg.n_neurons < 1 or cfg.n_bins < 1:
        raise ValueError("surrogate needs n_neurons >= 1 and n_bins >= 1")
    if cfg.n_classes < 1:
        raise ValueError("surrogate needs at least one class")
    rng = np.random.default_rng(cfg.seed)

    if cfg.rate_profiles is not None:
        profiles = np.asarray(cfg.rate_profiles, dtype=np.float64)
        if profiles.shape != (cfg.n_classes, cfg.n_neurons, cfg.n_bins):
            raise ValueError(
                f"rate_profiles must have shape {(cfg.n_classes, cfg.n_neurons, cfg.n_bins)}"
            )
    else:
        # Each class drives a random third of the neurons with a smooth bump.
        profiles = np.full((cfg.n_classes, cfg.n_neurons, cfg.n_bins), cfg.base_rate)
        bins = np.arange(cfg.n_bins)
        for c in range(cfg.n_classes):
            active = rng.choice(cfg.n_neurons, size=max(1, cfg.n_neurons // 3), replace=False)
            peak = rng.uniform(0, cfg.n_bins - 1, size=active.shape[0])
            width = rng.uniform(1.0, 3.0, size=active.shape[0])
            bump = np.exp(-0.5 * ((bins[None, :] - peak[:, None]) / width[:, None]) ** 2)
            profiles[c, active] += cfg.rate_scale * bump

    if cfg.ood_rate_profile is not None:
        ood_profile = np.asarray(cfg.ood_rate_profile, dtype=np.float64)
        if ood_profile.shape != (cfg.n_neurons, cfg.n_bins):
            raise ValueError(f"ood_rate_profile must have shape {(cfg.n_neurons, cfg.n_bins)}")
    else:
        # Run state: broad elevated firing with no odor-locked structure.
        ood_profile = np.full(
            (cfg.n_neurons, cfg.n_bins), cfg.base_rate + 0.75 * cfg.rate_scale
        ) * rng.uniform(0.5, 1.5, size=(cfg.n_neurons, 1))

    if np.any(profiles < 0.0) or np.any(ood_profile < 0.0):
        raise ValueError("firing rates must be nonnegative")

    blocks = []
    labels = []
    for c in range(cfg.n_classes):
        counts = rng.poisson(profiles[c], size=(cfg.n_per_class, cfg.n_neurons, cfg.n_bins))
        blocks.append(counts.astype(np.float64))
        labels.append(np.full(cfg.n_per_class, c, dtype=np.int64))
    ood_counts = rng.poisson(ood_profile, size=(cfg.n_ood, cfg.n_neurons, cfg.n_bins))
    blocks.append(ood_counts.astype(np.float64))
    labels.append(np.full(cfg.n_ood, cfg.n_classes, dtype=np.int64))

    names = [f"odor_{c}" for c in range(cfg.n_classes)] + ["run"]
    return DatasetBundle(
        features=np.concatenate(blocks, axis=0),
        labels=np.concatenate(labels),
        label_names=names,
        provenance={"generator": "spike_surrogate", "seed": cfg.seed},
    )

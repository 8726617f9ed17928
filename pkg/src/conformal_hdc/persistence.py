"""Model and calibrator serialization.

Models save to a single ``.npz`` holding the prototype array, any fitted
grid arrays, and a JSON metadata record (encoder type, parameters, seeds,
similarity kind, style, label names). Reloading rebuilds the encoder from
its seeds, so a restored model reproduces the original bit for bit.

Calibrators save to JSON (thresholds, alpha, per-label counts, plus any
caller-supplied metadata such as the score kind and randomization seed).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .classifier import TrainedModel
from .conformal import ConditionalCalibrator, MarginalCalibrator
from .encoders import (
    BinaryImageEncoder,
    IdentityEncoder,
    QuantizationGrid,
    QuantizedFeatureEncoder,
    TemporalFpeEncoder,
    TrigramTextEncoder,
)

__all__ = ["load_calibrator", "load_model", "save_calibrator", "save_model"]


def _seed_to_json(seed):
    if seed is None:
        return {"kind": "none"}
    if isinstance(seed, (int, np.integer)):
        return {"kind": "int", "value": int(seed)}
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy
        if isinstance(entropy, (tuple, list)):
            entropy = [int(e) for e in entropy]
        else:
            entropy = int(entropy)
        return {"kind": "seedseq", "entropy": entropy, "spawn_key": [int(k) for k in seed.spawn_key]}
    raise TypeError(f"cannot serialize seed of type {type(seed).__name__}")


def _seed_from_json(obj):
    if obj["kind"] == "none":
        return None
    if obj["kind"] == "int":
        return obj["value"]
    entropy = obj["entropy"]
    if isinstance(entropy, list):
        entropy = tuple(entropy)
    return np.random.SeedSequence(entropy=entropy, spawn_key=tuple(obj["spawn_key"]))


def save_model(model: TrainedModel, path) -> None:
    state = model.encoder.state()
    enc_meta = {k: v for k, v in state.items() if not isinstance(v, np.ndarray)}
    if "seed" in enc_meta:
        enc_meta["seed"] = _seed_to_json(state["seed"])
    meta = {
        "format": "conformal-hdc-model/1",
        "similarity_kind": model.similarity_kind,
        "style": model.style,
        "labels": np.asarray(model.labels).tolist(),
        "encoder": enc_meta,
    }
    arrays = {"prototypes": model.prototypes}
    if state.get("grid_mins") is not None:
        arrays["grid_mins"] = state["grid_mins"]
        arrays["grid_maxs"] = state["grid_maxs"]
    np.savez(path, meta=np.array(json.dumps(meta)), **arrays)


def _rebuild_encoder(enc_meta: dict, arrays) -> object:
    kind = enc_meta["type"]
    seed = _seed_from_json(enc_meta["seed"]) if "seed" in enc_meta else None
    if kind == "identity":
        return IdentityEncoder(p=enc_meta["p"])
    if kind == "binary_image":
        return BinaryImageEncoder(p=enc_meta["p"], d=enc_meta["d"], seed=seed)
    if kind == "quantized_features":
        enc = QuantizedFeatureEncoder(
            p=enc_meta["p"], d=enc_meta["d"], levels=enc_meta["levels"], seed=seed
        )
        if "grid_mins" in arrays:
            enc.grid = QuantizationGrid(
                mins=arrays["grid_mins"], maxs=arrays["grid_maxs"], levels=enc_meta["levels"]
            )
        return enc
    if kind == "trigram_text":
        return TrigramTextEncoder(d=enc_meta["d"], seed=seed)
    if kind == "temporal_fpe":
        return TemporalFpeEncoder(
            p=enc_meta["p"],
            d=enc_meta["d"],
            t_max=enc_meta["t_max"],
            beta=enc_meta["beta"],
            seed=seed,
        )
    raise ValueError(f"unknown encoder type {kind!r} in model file")


def load_model(path) -> TrainedModel:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format") != "conformal-hdc-model/1":
            raise ValueError(f"{path}: not a conformal-hdc model file")
        encoder = _rebuild_encoder(meta["encoder"], data)
        prototypes = data["prototypes"]
        return TrainedModel(
            encoder=encoder,
            prototypes=prototypes,
            similarity_kind=meta["similarity_kind"],
            style=meta["style"],
            labels=np.asarray(meta["labels"]),
        )


def save_calibrator(calibrator, path, metadata: dict | None = None) -> None:
    if isinstance(calibrator, MarginalCalibrator):
        record = {
            "format": "conformal-hdc-calibrator/1",
            "type": "marginal",
            "q_hat": calibrator.q_hat,
            "alpha": calibrator.alpha,
            "n_cal": calibrator.n_cal,
        }
    elif isinstance(calibrator, ConditionalCalibrator):
        record = {
            "format": "conformal-hdc-calibrator/1",
            "type": "conditional",
            "q_hat_per_label": calibrator.q_hat_per_label.tolist(),
            "alpha": calibrator.alpha,
            "counts": calibrator.counts.tolist(),
        }
    else:
        raise TypeError(f"cannot serialize calibrator of type {type(calibrator).__name__}")
    if metadata:
        record["metadata"] = metadata
    Path(path).write_text(json.dumps(record, indent=2, sort_keys=True))


def load_calibrator(path):
    record = json.loads(Path(path).read_text())
    if record.get("format") != "conformal-hdc-calibrator/1":
        raise ValueError(f"{path}: not a conformal-hdc calibrator file")
    if record["type"] == "marginal":
        return MarginalCalibrator(
            q_hat=record["q_hat"], alpha=record["alpha"], n_cal=record["n_cal"]
        )
    return ConditionalCalibrator(
        q_hat_per_label=np.asarray(record["q_hat_per_label"], dtype=np.float64),
        alpha=record["alpha"],
        counts=np.asarray(record["counts"], dtype=np.int64),
    )

#!/usr/bin/env python3
"""Desk-scale digit benchmark with held-out classes as OOD.

Needs the four standard IDX files (train/t10k images and labels) under
./data/mnist or the directory named by CONFORMAL_HDC_MNIST_DIR. Digits
6-9 never appear in training or calibration; they form the OOD pool the
abstention AUC is measured on. At d=2000 and ten repetitions this runs
in a few minutes; raise d to 10000 and repetitions to 100 for the
full-scale numbers (several hours on a laptop-class machine).
"""

import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from conformal_hdc import ExperimentConfig, ingest_mnist, run_experiment
from conformal_hdc.cli import format_summary

root = Path(os.environ.get("CONFORMAL_HDC_MNIST_DIR", "data/mnist"))
pairs = []
for img_stem, lbl_stem in (
    ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
):
    for suffix in ("", ".gz"):
        img, lbl = root / (img_stem + suffix), root / (lbl_stem + suffix)
        if img.exists() and lbl.exists():
            pairs.append((img, lbl))
            break

if not pairs:
    sys.exit(
        f"no IDX files under {root}; download the four standard files "
        "(train-images-idx3-ubyte.gz etc.) there or set CONFORMAL_HDC_MNIST_DIR"
    )

bundles = [ingest_mnist(img, lbl) for img, lbl in pairs]
bundle = dataclasses.replace(
    bundles[0],
    features=np.concatenate([b.features for b in bundles]),
    labels=np.concatenate([b.labels for b in bundles]),
)
print(f"loaded {bundle.n_samples} images from {len(pairs)} file pair(s)")

cfg = ExperimentConfig(dataset="mnist", alpha=0.05, d=2000, repetitions=10, seed=1)
result = run_experiment(cfg, bundle)
print(format_summary(result))
print()
print("digits 6-9 were held out of training and calibration; the AUC column")
print("ranks them against inlier test digits by whether the method abstains")

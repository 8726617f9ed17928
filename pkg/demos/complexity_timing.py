#!/usr/bin/env python3
"""Wall-clock check of the linear inference-cost contract.

Total cost is O(T + n_cal*K*d + m*K*d): after the one-time training and
calibration, classifying m test points against K prototypes of dimension
d costs m*K*d. Doubling m at fixed (K, d) — or doubling d at fixed
(m, K) — should therefore roughly double the measured wall time. This
script times the full query path (encode, similarity profile, scores,
set construction) and reports the doubling ratios.
"""

import time

import numpy as np

from conformal_hdc.conformal import score_matrix, sets_from_scores
from conformal_hdc.encoders import BinaryImageEncoder
from conformal_hdc.hypervectors import similarity_matrix


def inference_seconds(m: int, d: int, k: int = 10, p: int = 784, trials: int = 5) -> float:
    rng = np.random.default_rng(0)
    encoder = BinaryImageEncoder(p=p, d=d, seed=1)
    X = (rng.uniform(size=(m, p)) > 0.8).astype(np.uint8)
    prototypes = rng.integers(0, 2, size=(k, d), dtype=np.int8) * 2 - 1
    times = []
    for _ in range(trials):
        start = time.perf_counter()
        queries = encoder.encode_batch(X)
        profiles = similarity_matrix(queries, prototypes, "cosine_normalized")
        scores = score_matrix(profiles, "discount")
        sets_from_scores(scores, -0.1)
        times.append(time.perf_counter() - start)
    return float(np.median(times))


if __name__ == "__main__":
    m, d = 4000, 4000
    base = inference_seconds(m, d)
    double_m = inference_seconds(2 * m, d)
    double_d = inference_seconds(m, 2 * d)
    print(f"baseline        (m={m}, d={d}):  {base:.3f} s")
    print(f"double m        (m={2*m}, d={d}):  {double_m:.3f} s   ratio x{double_m / base:.2f}")
    print(f"double d        (m={m}, d={2*d}):  {double_d:.3f} s   ratio x{double_d / base:.2f}")
    in_band = 1.6 <= double_m / base <= 2.4 and 1.6 <= double_d / base <= 2.4
    print(f"both ratios within [1.6, 2.4]: {in_band}")

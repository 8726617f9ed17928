"""Hypervector representations and their algebra.

Two dense representations are supported:

* bipolar vectors in ``{-1, +1}^d``, with element-wise product as binding
  and cyclic right-rotation as permutation;
* complex unit-circle vectors stored as phase angles in ``[0, 2*pi)``,
  where binding adds phases modulo ``2*pi``.

Bundling accumulates element-wise sums into a real accumulator that is
binarized back to bipolar form with a sign function (ties at zero map to
+1 so repeated runs agree bit for bit). Temporal superpositions of phasors
are kept as unnormalized complex accumulators.

All similarity metrics are standardized to be nonnegative so downstream
scoring can treat them as evidence: cosine and Hamming map into [0, 1],
the inverse Euclidean map is capped at ``1/EPS``, and the complex cosine
of unit-modulus vectors lands in [0, 1] by construction.

Values are immutable after construction; every operation returns a new
object, so hypervectors are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

__all__ = [
    "EPS",
    "INVERSE_EUCLIDEAN_CAP",
    "SIMILARITY_KINDS",
    "TWO_PI",
    "BipolarHypervector",
    "ComplexAccumulator",
    "ComplexHypervector",
    "RealAccumulator",
    "bind",
    "bundle",
    "permute",
    "random_bipolar",
    "random_phase",
    "sign_binarize",
    "similarity",
    "similarity_matrix",
]

TWO_PI = 2.0 * np.pi

#: Regularizer for the inverse Euclidean similarity; an exact match scores 1/EPS.
EPS = 1e-12
INVERSE_EUCLIDEAN_CAP = 1.0 / EPS

SIMILARITY_KINDS = (
    "cosine_normalized",
    "inverse_euclidean",
    "hamming_similarity",
    "complex_cosine",
)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BipolarHypervector:
    """Dense vector over {-1, +1}."""

    elements: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.elements)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("bipolar hypervector must be a nonempty 1-d sequence")
        if not np.all(np.abs(arr) == 1):
            raise ValueError("bipolar hypervector elements must be -1 or +1")
        object.__setattr__(self, "elements", _freeze(arr.astype(np.int8)))

    @property
    def d(self) -> int:
        return self.elements.shape[0]


@dataclass(frozen=True, eq=False)
class RealAccumulator:
    """Unbounded real vector holding pre-binarization sums."""

    elements: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.elements, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("accumulator must be a nonempty 1-d sequence")
        object.__setattr__(self, "elements", _freeze(arr))

    @property
    def d(self) -> int:
        return self.elements.shape[0]


@dataclass(frozen=True, eq=False)
class ComplexHypervector:
    """Unit-circle phasor vector stored as phase angles in [0, 2*pi)."""

    phases: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.phases, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("complex hypervector must be a nonempty 1-d sequence")
        object.__setattr__(self, "phases", _freeze(np.mod(arr, TWO_PI)))

    @property
    def d(self) -> int:
        return self.phases.shape[0]

    def as_complex(self) -> np.ndarray:
        """Phasor values e^{i*theta} as a complex128 array."""
        return np.exp(1j * self.phases)


@dataclass(frozen=True, eq=False)
class ComplexAccumulator:
    """Unnormalized complex vector (superposition of phasors).

    Per-element magnitudes may exceed one; the complex cosine similarity is
    still evaluated as Re[h1^T conj(h2)] / d on the raw values.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.complex128)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("complex accumulator must be a nonempty 1-d sequence")
        object.__setattr__(self, "values", _freeze(arr))

    @property
    def d(self) -> int:
        return self.values.shape[0]


Hypervector = Union[BipolarHypervector, ComplexHypervector]
RealLike = Union[BipolarHypervector, RealAccumulator]
ComplexLike = Union[ComplexHypervector, ComplexAccumulator]


def random_bipolar(d: int, seed) -> BipolarHypervector:
    """Draw a vector with i.i.d. uniform {-1, +1} entries.

    The same seed always yields the same vector; at large ``d`` two vectors
    from different seeds are quasi-orthogonal with overwhelming probability.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=d, dtype=np.int8)
    return BipolarHypervector(bits * 2 - 1)


def random_phase(d: int, seed) -> ComplexHypervector:
    """Draw phases i.i.d. uniform on [0, 2*pi), deterministic in the seed."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    return ComplexHypervector(rng.uniform(0.0, TWO_PI, size=d))


def bundle(hs: Sequence[BipolarHypervector]) -> RealAccumulator:
    """Element-wise sum of bipolar hypervectors (order-independent)."""
    hs = list(hs)
    if not hs:
        raise ValueError("cannot bundle an empty list")
    for h in hs:
        if not isinstance(h, BipolarHypervector):
            raise TypeError("bundle expects BipolarHypervector inputs")
    d = hs[0].d
    if any(h.d != d for h in hs):
        raise ValueError("cannot bundle hypervectors of mixed dimension")
    total = np.zeros(d, dtype=np.float64)
    for h in hs:
        total += h.elements
    return RealAccumulator(total)


def sign_binarize(a: RealAccumulator) -> BipolarHypervector:
    """Element-wise sign with the tie 0 -> +1.

    The deterministic tie-break keeps repeated trainings bit-identical; an
    all-zero accumulator therefore maps to the all-(+1) vector.
    """
    return BipolarHypervector(np.where(a.elements >= 0, 1, -1).astype(np.int8))


def bind(h1, h2):
    """Associate two hypervectors of the same representation.

    Bipolar: element-wise product (self-inverse). Complex: element-wise
    phase addition modulo 2*pi.
    """
    if isinstance(h1, BipolarHypervector) and isinstance(h2, BipolarHypervector):
        if h1.d != h2.d:
            raise ValueError("cannot bind hypervectors of mixed dimension")
        return BipolarHypervector(h1.elements * h2.elements)
    if isinstance(h1, ComplexHypervector) and isinstance(h2, ComplexHypervector):
        if h1.d != h2.d:
            raise ValueError("cannot bind hypervectors of mixed dimension")
        return ComplexHypervector(np.mod(h1.phases + h2.phases, TWO_PI))
    raise TypeError(
        f"cannot bind {type(h1).__name__} with {type(h2).__name__}: "
        "representations must match"
    )


def permute(h, k: int):
    """Cyclic right-rotation by ``k`` positions; ``k = d`` is the identity."""
    if k < 0:
        raise ValueError(f"shift count must be >= 0, got {k}")
    if isinstance(h, BipolarHypervector):
        return BipolarHypervector(np.roll(h.elements, k % h.d))
    if isinstance(h, ComplexHypervector):
        return ComplexHypervector(np.roll(h.phases, k % h.d))
    raise TypeError(f"cannot permute {type(h).__name__}")


def _real_elements(h) -> np.ndarray:
    if isinstance(h, (BipolarHypervector, RealAccumulator)):
        return np.asarray(h.elements, dtype=np.float64)
    raise TypeError(
        f"{type(h).__name__} is not a real/bipolar hypervector; "
        "use kind='complex_cosine' for complex representations"
    )


def _complex_values(h) -> np.ndarray:
    if isinstance(h, ComplexHypervector):
        return h.as_complex()
    if isinstance(h, ComplexAccumulator):
        return h.values
    raise TypeError(
        f"{type(h).__name__} is not a complex hypervector; "
        "kind='complex_cosine' applies to complex representations only"
    )


def _cosine_normalized(a: np.ndarray, b: np.ndarray) -> float:
    aa = float(np.dot(a, a))
    bb = float(np.dot(b, b))
    if aa == 0.0 or bb == 0.0:
        # Degenerate zero accumulator: treat as orthogonal.
        return 0.5
    # sqrt(aa * bb) keeps self-similarity at exactly 1.0 for integer dots.
    cos = float(np.dot(a, b)) / np.sqrt(aa * bb)
    return (min(max(cos, -1.0), 1.0) + 1.0) / 2.0


def _inverse_euclidean(a: np.ndarray, b: np.ndarray) -> float:
    dist = float(np.linalg.norm(a - b))
    return min(1.0 / (dist + EPS), INVERSE_EUCLIDEAN_CAP)


def _hamming_similarity(a: np.ndarray, b: np.ndarray) -> float:
    return 1.0 - float(np.count_nonzero(a != b)) / a.shape[0]


def _complex_cosine(a: np.ndarray, b: np.ndarray) -> float:
    re = float(np.real(np.dot(a, np.conj(b)))) / a.shape[0]
    # Unit-modulus inputs land in [0, 1]; raw accumulators may exceed 1 but
    # are floored at 0 so scores can treat the output as evidence.
    return max((re + 1.0) / 2.0, 0.0)


def similarity(h1, h2, kind: str) -> float:
    """Standardized nonnegative similarity between two hypervectors.

    ``cosine_normalized`` maps the raw cosine linearly onto [0, 1];
    ``inverse_euclidean`` is 1/(L2 distance + EPS) capped at 1/EPS;
    ``hamming_similarity`` is 1 - (mismatch count)/d; ``complex_cosine``
    is (Re[h1^T conj(h2)]/d + 1)/2. All kinds are symmetric in their
    arguments.
    """
    if kind not in SIMILARITY_KINDS:
        raise ValueError(f"unknown similarity kind {kind!r}; expected one of {SIMILARITY_KINDS}")
    if kind == "complex_cosine":
        a, b = _complex_values(h1), _complex_values(h2)
        if a.shape[0] != b.shape[0]:
            raise ValueError("dimension mismatch in similarity")
        return _complex_cosine(a, b)
    a, b = _real_elements(h1), _real_elements(h2)
    if a.shape[0] != b.shape[0]:
        raise ValueError("dimension mismatch in similarity")
    if kind == "cosine_normalized":
        return _cosine_normalized(a, b)
    if kind == "inverse_euclidean":
        return _inverse_euclidean(a, b)
    return _hamming_similarity(a, b)


def similarity_matrix(queries: np.ndarray, prototypes: np.ndarray, kind: str) -> np.ndarray:
    """Similarity of every query row against every prototype row.

    Vectorized companion of :func:`similarity` used on (n, d) query and
    (K, d) prototype arrays; returns an (n, K) float64 matrix. Real kinds
    take real arrays, ``complex_cosine`` takes complex arrays.
    """
    if kind not in SIMILARITY_KINDS:
        raise ValueError(f"unknown similarity kind {kind!r}; expected one of {SIMILARITY_KINDS}")
    q = np.atleast_2d(queries)
    p = np.atleast_2d(prototypes)
    if q.shape[1] != p.shape[1]:
        raise ValueError("dimension mismatch between queries and prototypes")

    if kind == "complex_cosine":
        q = q.astype(np.complex128, copy=False)
        p = p.astype(np.complex128, copy=False)
        re = np.real(q @ np.conj(p).T) / q.shape[1]
        return np.maximum((re + 1.0) / 2.0, 0.0)

    if kind == "hamming_similarity":
        mismatches = (q[:, None, :] != p[None, :, :]).sum(axis=2)
        return 1.0 - mismatches / q.shape[1]

    qf = q.astype(np.float64, copy=False)
    pf = p.astype(np.float64, copy=False)
    if kind == "cosine_normalized":
        qq = (qf * qf).sum(axis=1)
        pp = (pf * pf).sum(axis=1)
        denom = np.sqrt(np.outer(qq, pp))
        dots = qf @ pf.T
        cos = np.where(denom > 0.0, dots / np.where(denom > 0.0, denom, 1.0), 0.0)
        return (np.clip(cos, -1.0, 1.0) + 1.0) / 2.0

    # inverse_euclidean: expand ||q - p||^2 = ||q||^2 - 2 q.p + ||p||^2
    sq = (qf * qf).sum(axis=1)[:, None] - 2.0 * (qf @ pf.T) + (pf * pf).sum(axis=1)[None, :]
    dist = np.sqrt(np.maximum(sq, 0.0))
    return np.minimum(1.0 / (dist + EPS), INVERSE_EUCLIDEAN_CAP)

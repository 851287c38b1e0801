"""Dataset diversity metrics and the sample-complexity bound.

Two metrics: the softmax-trace score (row-wise softmax of the similarity
matrix, summed down the diagonal; each sample contributes the probability
mass it assigns to itself) and the distinct m-gram ratio. Both come with
the n^p size adjustment that offsets the raw scores' decay with dataset
size. A small utility evaluates the VC-style sample bound rho used to
reason about how large a diverse prefix must be.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ordering import CuriosityOrder
from .similarity import GramBag, SimilarityMatrix

DEFAULT_P = 0.5
DEFAULT_M = 2
RATIO_FUZZ = 1e-9


@dataclass(frozen=True)
class DiversityParams:
    """Metric knobs: size-adjustment exponent p and gram length m."""

    p: float = DEFAULT_P
    m: int = DEFAULT_M

    def __post_init__(self):
        if self.p < 0:
            raise ValueError(f"p must be >= 0, got {self.p}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")


@dataclass(frozen=True)
class DiversityReport:
    metric: str
    raw: float
    adjusted: float
    n: int
    params: DiversityParams = field(default_factory=DiversityParams)

    def as_dict(self) -> dict:
        return {
            "metric": self.metric,
            "raw": self.raw,
            "adjusted": self.adjusted,
            "n": self.n,
            "p": self.params.p,
            "m": self.params.m,
        }


def row_softmax(values: np.ndarray) -> np.ndarray:
    """Row-wise softmax with per-row max subtraction (overflow-safe,
    mathematically identical to the naive form)."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {v.shape}")
    shifted = v - v.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def dcscore(M_S: SimilarityMatrix, p: float = DEFAULT_P) -> DiversityReport:
    """Softmax-trace diversity of the subset whose similarity matrix is M_S.

    raw = trace(row_softmax(M_S)), in (0, n]; adjusted = n^p * raw. The
    diagonal self-similarity of 1.0 participates in each row's softmax.
    """
    n = M_S.n
    if n < 1:
        raise ValueError("empty similarity matrix")
    raw = float(np.trace(row_softmax(M_S.values)))
    return DiversityReport(
        metric="dcscore",
        raw=raw,
        adjusted=float(n**p) * raw,
        n=n,
        params=DiversityParams(p=p),
    )


def ngram_diversity(bag: GramBag, p: float = DEFAULT_P) -> DiversityReport:
    """Distinct-gram ratio: globally distinct m-grams over total m-grams."""
    total = bag.total()
    if total == 0:
        raise ValueError(
            f"no grams: every sample is shorter than m={bag.m} tokens"
        )
    raw = bag.distinct() / total
    n = bag.n
    return DiversityReport(
        metric="ngram",
        raw=raw,
        adjusted=float(n**p) * raw,
        n=n,
        params=DiversityParams(p=p, m=bag.m),
    )


def prefix_size(ratio: float, n: int) -> int:
    """ceil(ratio * n) with a fuzz guard so 0.2 * 5 lands on 1, not 2."""
    return min(n, max(1, math.ceil(ratio * n - RATIO_FUZZ)))


def prefix_curve(
    order: CuriosityOrder,
    M: SimilarityMatrix,
    p: float = DEFAULT_P,
    ratios=(0.2, 0.4, 0.6, 0.8, 1.0),
) -> list[DiversityReport]:
    """Softmax-trace score of the order's leading ceil(r*n) samples for each
    ratio r, scored on the induced principal submatrix."""
    ratios = list(ratios)
    if not ratios:
        raise ValueError("empty ratio list")
    for r in ratios:
        if not 0.0 < r <= 1.0:
            raise ValueError(f"ratio {r} outside (0, 1]")
    n = M.n
    if order.n != n:
        raise ValueError(f"order length {order.n} != matrix size {n}")
    reports = []
    for r in ratios:
        k = prefix_size(r, n)
        sub = M.submatrix(order.path[:k])
        reports.append(dcscore(sub, p=p))
    return reports


@dataclass(frozen=True)
class BoundParams:
    """Inputs to the sample bound: capacity d, sample count n, confidence
    delta, scale C."""

    d: float
    n: int
    delta: float
    C: float = 1.0

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError(f"d must be positive, got {self.d}")
        if self.n < self.d:
            raise ValueError(f"n must be >= d, got n={self.n}, d={self.d}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if self.C <= 0:
            raise ValueError(f"C must be positive, got {self.C}")


def generalization_bound(b: BoundParams) -> float:
    """rho = C * sqrt((d * ln(n/d) + ln(1/delta)) / n), natural logs."""
    inner = (b.d * math.log(b.n / b.d) + math.log(1.0 / b.delta)) / b.n
    return b.C * math.sqrt(inner)


def bound_summary(b: BoundParams) -> dict:
    """rho plus its two standard multiples: the 2*rho tolerance within which
    a prefix-trained model tracks the full-data optimum, and the 3*rho cap
    on the excess risk."""
    rho = generalization_bound(b)
    return {"rho": rho, "gamma": 2.0 * rho, "risk_bound": 3.0 * rho}

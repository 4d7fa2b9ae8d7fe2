"""Per-dataset rankings and rank-correlation statistics."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from itertools import combinations
from types import MappingProxyType

import numpy as np
import numpy.typing as npt
from scipy.stats import rankdata

from .meta_data import PerformanceMatrix

__all__ = [
    "Characterization",
    "Ranking",
    "characterize",
    "rank_columns",
    "rank_from_performance",
    "rankings_from_matrix",
    "spearman",
]

_RANK_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Ranking:
    """A possibly partial ranking of algorithms.

    ``entries`` maps algorithm id to rank (1 is best, ties share the average of
    the positions they span). ``n_max`` is the size of the algorithm universe,
    i.e. how many entries a complete ranking would have.
    """

    entries: Mapping[str, float]
    n_max: int

    def __post_init__(self) -> None:
        entries = {str(k): float(v) for k, v in self.entries.items()}
        object.__setattr__(self, "entries", MappingProxyType(entries))
        n = len(entries)
        if self.n_max < 1:
            raise ValueError("n_max must be positive")
        if not 1 <= n <= self.n_max:
            raise ValueError(f"ranking has {n} entries, expected 1..{self.n_max}")
        ranks = np.fromiter(entries.values(), dtype=np.float64, count=n)
        if ranks.min() < 1.0 or ranks.max() > n:
            raise ValueError("ranks must lie in [1, N]")
        if abs(ranks.sum() - n * (n + 1) / 2) > _RANK_SUM_TOL * n * n:
            raise ValueError("ranks must sum to N(N+1)/2")

    @classmethod
    def from_order(cls, order: list[str], n_max: int | None = None) -> Ranking:
        """Ranking from a best-first list with no ties."""
        return cls({a: float(i + 1) for i, a in enumerate(order)}, n_max or len(order))

    @property
    def n(self) -> int:
        return len(self.entries)

    def order(self) -> list[str]:
        """Algorithm ids best-first; tied entries fall back to id order."""
        return sorted(self.entries, key=lambda a: (self.entries[a], a))


def rank_columns(accuracy: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Rank each column of an (n_algorithms, n_datasets) accuracy array.

    Highest accuracy gets rank 1; ties get average ranks; ``NaN`` cells stay
    ``NaN`` and are excluded from the ranking of their column.
    """
    if accuracy.size == 0:
        return np.array(accuracy, dtype=np.float64)
    return rankdata(-accuracy, axis=0, nan_policy="omit")


def rank_from_performance(matrix: PerformanceMatrix, dataset_id: str) -> Ranking:
    """Rank the algorithms tested on one dataset by accuracy, best first.

    Raises:
        KeyError: unknown dataset.
        ValueError: the dataset has no present cells.
    """
    j = matrix.dataset_index(dataset_id)
    column = matrix.accuracy[:, j]
    present = ~np.isnan(column)
    if not present.any():
        raise ValueError(f"dataset {dataset_id!r} has no test results")
    ranks = rankdata(-column[present], method="average")
    algs = [a for a, p in zip(matrix.algorithms, present) if p]
    return Ranking(dict(zip(algs, ranks.tolist())), len(matrix.algorithms))


def rankings_from_matrix(matrix: PerformanceMatrix) -> list[Ranking]:
    """Rankings for every dataset with at least one result, in dataset order."""
    out = []
    for j, ds in enumerate(matrix.datasets):
        if not np.isnan(matrix.accuracy[:, j]).all():
            out.append(rank_from_performance(matrix, ds))
    return out


def spearman(r1: Ranking, r2: Ranking) -> float:
    """Spearman correlation over the algorithms both rankings contain.

    The common algorithms are re-ranked within the intersection and the
    Pearson correlation of those rank vectors is returned, so ties need no
    correction term.

    Raises:
        ValueError: fewer than two common algorithms, or one side is fully tied
            on the intersection (the coefficient is undefined).
    """
    common = sorted(set(r1.entries) & set(r2.entries))
    if len(common) < 2:
        raise ValueError("need at least two common algorithms")
    x = rankdata([r1.entries[a] for a in common])
    y = rankdata([r2.entries[a] for a in common])
    x = x - x.mean()
    y = y - y.mean()
    denom = math.sqrt(float(np.dot(x, x)) * float(np.dot(y, y)))
    if denom == 0.0:
        raise ValueError("Spearman correlation undefined for a constant ranking")
    return max(-1.0, min(1.0, float(np.dot(x, y)) / denom))


@dataclass(frozen=True)
class Characterization:
    """Distribution of pairwise Spearman correlations between dataset rankings.

    ``cv_percent`` is sd / mean * 100 (``nan`` when the mean is 0).
    """

    histogram: list[tuple[float, float, int]]
    mean: float
    sd: float
    cv_percent: float
    correlations: list[float] = field(repr=False)

    @property
    def n_pairs(self) -> int:
        return len(self.correlations)

    def summary(self) -> dict[str, float | int]:
        return {"mean": self.mean, "sd": self.sd, "cv": self.cv_percent, "n_pairs": self.n_pairs}


def characterize(matrix: PerformanceMatrix, bin_width: float = 0.1) -> Characterization:
    """Histogram and moments of Spearman correlations over all dataset pairs.

    Pairs sharing fewer than two algorithms, or where a side is constant on the
    shared algorithms, are skipped.
    """
    rankings = rankings_from_matrix(matrix)
    values = []
    for r1, r2 in combinations(rankings, 2):
        try:
            values.append(spearman(r1, r2))
        except ValueError:
            continue
    if not values:
        raise ValueError("no dataset pair with at least two common algorithms")
    arr = np.asarray(values)
    n_bins = int(round(2.0 / bin_width))
    edges = np.round(np.linspace(-1.0, 1.0, n_bins + 1), 12)
    counts, _ = np.histogram(arr, bins=edges)
    mean = float(arr.mean())
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    cv = sd / mean * 100.0 if mean != 0.0 else math.nan
    hist = [(float(lo), float(hi), int(c)) for lo, hi, c in zip(edges[:-1], edges[1:], counts)]
    return Characterization(hist, mean, sd, cv, values)

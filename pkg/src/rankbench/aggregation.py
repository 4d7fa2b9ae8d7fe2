"""Average ranking of incomplete rankings.

Two aggregators are provided:

* ``aggregate_baseline_ar``: the usual average ranking, i.e. the plain mean of
  each algorithm's observed ranks.
* ``aggregate_incremental``: the weighted average ranking (AR-MTA). Each
  ranking with N of Nmax elements carries weight (N - 1) / (Nmax - 1), and the
  rankings are folded one at a time into the running aggregate::

      r_A := r_A * w_A / (w_A + w_j) + r_j * w_j / (w_A + w_j)
      w_A := w_A + w_j

  Elements missing from the incoming ranking keep their rank and weight.

``aggregate_closed_form`` computes the same result as a weighted mean in one
pass and exists as an independent check on the incremental fold.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np
import numpy.typing as npt

from . import kernels
from .ranking import Ranking

__all__ = [
    "AggregateEntry",
    "AggregateRanking",
    "aggregate_baseline_ar",
    "aggregate_closed_form",
    "aggregate_incremental",
    "baseline_arrays",
    "incremental_arrays",
    "order_indices",
    "ranking_weight",
    "ranking_weights",
]

# Aggregate ranks closer than this are ties when building a total order; keeps
# the order independent of summation rounding.
RANK_DECIMALS = 9


@dataclass(frozen=True)
class AggregateEntry:
    rank: float
    weight: float


@dataclass(frozen=True)
class AggregateRanking:
    """Aggregated rank and accumulated weight per algorithm."""

    entries: Mapping[str, AggregateEntry]
    n_max: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))
        if len(self.entries) > self.n_max:
            raise ValueError("more entries than n_max")

    def order(self) -> list[str]:
        """Total order: rank ascending, then weight descending, then algorithm id."""
        return sorted(self.entries, key=lambda a: _sort_key(a, self.entries[a].rank, self.entries[a].weight))

    def __getitem__(self, algorithm_id: str) -> AggregateEntry:
        return self.entries[algorithm_id]

    def __len__(self) -> int:
        return len(self.entries)


def _sort_key(algorithm_id: str, rank: float, weight: float) -> tuple[float, float, str]:
    return (round(rank, RANK_DECIMALS), -weight, algorithm_id)


def ranking_weight(n_present: int, n_max: int) -> float:
    """Weight (N - 1) / (Nmax - 1) of a ranking with N of Nmax elements filled in.

    >>> ranking_weight(2, 6)
    0.2
    """
    if n_max < 2:
        raise ValueError("ranking weight is undefined for n_max < 2")
    if not 1 <= n_present <= n_max:
        raise ValueError(f"n_present must lie in 1..{n_max}, got {n_present}")
    return (n_present - 1) / (n_max - 1)


def ranking_weights(ranks: npt.NDArray[np.float64], n_max: int) -> npt.NDArray[np.float64]:
    """Per-row weights of a stacked (n_rankings, n_items) rank array."""
    if n_max < 2:
        raise ValueError("ranking weight is undefined for n_max < 2")
    n = np.sum(~np.isnan(ranks), axis=1)
    return (n - 1) / (n_max - 1)


def _validate(rankings: Sequence[Ranking], n_max: int | None) -> int:
    if not rankings:
        raise ValueError("at least one ranking is required")
    if n_max is None:
        n_max = rankings[0].n_max
    for r in rankings:
        if r.n_max != n_max:
            raise ValueError(f"inconsistent n_max: ranking has {r.n_max}, expected {n_max}")
    return n_max


def _stack(rankings: Sequence[Ranking]) -> tuple[list[str], npt.NDArray[np.float64]]:
    ids = sorted({a for r in rankings for a in r.entries})
    col = {a: i for i, a in enumerate(ids)}
    out = np.full((len(rankings), len(ids)), np.nan)
    for j, r in enumerate(rankings):
        for a, rank in r.entries.items():
            out[j, col[a]] = rank
    return ids, out


def _build(ids, rank, weight, count, n_max) -> AggregateRanking:
    entries = {
        a: AggregateEntry(float(rank[i]), float(weight[i]))
        for i, a in enumerate(ids)
        if count[i] > 0
    }
    return AggregateRanking(entries, n_max)


def incremental_arrays(ranks: npt.NDArray[np.float64], n_max: int):
    """Array form of :func:`aggregate_incremental`; returns (rank, weight, count)."""
    return kernels.fold_weighted(ranks, ranking_weights(ranks, n_max))


def baseline_arrays(ranks: npt.NDArray[np.float64]):
    """Array form of :func:`aggregate_baseline_ar`; returns (rank, weight, count)."""
    present = ~np.isnan(ranks)
    count = present.sum(axis=0)
    total = np.where(present, ranks, 0.0).sum(axis=0)
    rank = np.divide(total, count, out=np.zeros_like(total), where=count > 0)
    return rank, count.astype(np.float64), count


def order_indices(rank, weight, count, ids: Sequence[str]) -> npt.NDArray[np.int64]:
    """Indices of observed items in the documented total order."""
    idx = [i for i in range(len(ids)) if count[i] > 0]
    idx.sort(key=lambda i: _sort_key(ids[i], float(rank[i]), float(weight[i])))
    return np.asarray(idx, dtype=np.int64)


def aggregate_incremental(rankings: Sequence[Ranking], n_max: int | None = None) -> AggregateRanking:
    """Fold rankings one by one into a weighted average ranking (AR-MTA).

    The first ranking initialises the aggregate. Elements seen for the first
    time in a later ranking are inserted with that ranking's rank and weight.
    An element whose accumulated weight is still 0 (only seen in single-element
    rankings) carries the plain mean of its observed ranks.

    Raises:
        ValueError: empty input or rankings with differing ``n_max``.
    """
    n_max = _validate(rankings, n_max)
    ids, ranks = _stack(rankings)
    return _build(ids, *incremental_arrays(ranks, n_max), n_max)


def aggregate_closed_form(rankings: Sequence[Ranking], n_max: int | None = None) -> AggregateRanking:
    """Weighted mean of observed ranks, computed directly.

    For each algorithm: rank = sum(w_j * r_j) / sum(w_j) over the rankings that
    contain it, weight = sum(w_j). Falls back to the unweighted mean (weight 0)
    when every contributing weight is 0.
    """
    n_max = _validate(rankings, n_max)
    num: dict[str, float] = {}
    den: dict[str, float] = {}
    plain: dict[str, list[float]] = {}
    for r in rankings:
        w = ranking_weight(r.n, n_max)
        for a, rank in r.entries.items():
            num[a] = num.get(a, 0.0) + w * rank
            den[a] = den.get(a, 0.0) + w
            plain.setdefault(a, []).append(rank)
    entries = {}
    for a in plain:
        if den[a] > 0.0:
            entries[a] = AggregateEntry(num[a] / den[a], den[a])
        else:
            entries[a] = AggregateEntry(sum(plain[a]) / len(plain[a]), 0.0)
    return AggregateRanking(entries, n_max)


def aggregate_baseline_ar(rankings: Sequence[Ranking]) -> AggregateRanking:
    """Plain average ranking: mean of observed ranks; weight is the observation count."""
    if not rankings:
        raise ValueError("at least one ranking is required")
    n_max = max(r.n_max for r in rankings)
    ids, ranks = _stack(rankings)
    return _build(ids, *baseline_arrays(ranks), n_max)

"""Omission simulators that degrade a meta-dataset.

MTD drops every test result on a random subset of datasets. MTA drops a fixed
fraction of the test results on each dataset, chosen uniformly so every
algorithm is equally likely to lose a result.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .meta_data import PerformanceMatrix

__all__ = ["Mode", "OmissionSpec", "apply", "apply_mta", "apply_mtd", "kept_count"]


class Mode(str, Enum):
    MTD = "MTD"
    MTA = "MTA"

    @classmethod
    def parse(cls, value: str | Mode) -> Mode:
        if isinstance(value, Mode):
            return value
        try:
            return cls(value.upper())
        except ValueError:
            raise ValueError(f"unknown omission mode {value!r}; expected mtd or mta") from None


@dataclass(frozen=True)
class OmissionSpec:
    mode: Mode
    percent: float
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if not 0.0 <= self.percent <= 100.0:
            raise ValueError("percent must lie in [0, 100]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def kept_count(total: int, percent: float) -> int:
    """Number of items kept after omitting ``percent`` % of ``total``.

    Rounds half to even: 53 at 50 % keeps 26, 38 at 5 % keeps 36.
    """
    return int(round(total * (100.0 - percent) / 100.0))


def _rng(spec: OmissionSpec) -> np.random.Generator:
    return np.random.default_rng(spec.seed)


def apply_mtd(matrix: PerformanceMatrix, spec: OmissionSpec, rng: np.random.Generator | None = None) -> PerformanceMatrix:
    """Empty all cells of a random subset of datasets; the dataset list is kept."""
    if spec.mode is not Mode.MTD:
        raise ValueError("apply_mtd requires an MTD spec")
    n_d = len(matrix.datasets)
    keep_n = kept_count(n_d, spec.percent)
    if keep_n == n_d:
        return matrix
    rng = rng or _rng(spec)
    chosen = rng.choice(n_d, size=keep_n, replace=False)
    keep = np.zeros(matrix.shape, dtype=bool)
    keep[:, chosen] = True
    return matrix.masked(keep)


def apply_mta(matrix: PerformanceMatrix, spec: OmissionSpec, rng: np.random.Generator | None = None) -> PerformanceMatrix:
    """Keep a fixed number of each dataset's present cells, chosen uniformly.

    Datasets are processed in order, each drawing from the same generator.
    """
    if spec.mode is not Mode.MTA:
        raise ValueError("apply_mta requires an MTA spec")
    if spec.percent == 0.0:
        return matrix
    rng = rng or _rng(spec)
    present = matrix.present
    keep = np.zeros(matrix.shape, dtype=bool)
    for j in range(present.shape[1]):
        rows = np.flatnonzero(present[:, j])
        chosen = rng.choice(rows, size=kept_count(rows.size, spec.percent), replace=False)
        keep[chosen, j] = True
    return matrix.masked(keep)


def apply(matrix: PerformanceMatrix, spec: OmissionSpec, rng: np.random.Generator | None = None) -> PerformanceMatrix:
    """Dispatch on ``spec.mode``."""
    if spec.mode is Mode.MTD:
        return apply_mtd(matrix, spec, rng)
    return apply_mta(matrix, spec, rng)

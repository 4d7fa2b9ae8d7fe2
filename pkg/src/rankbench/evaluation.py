"""Loss-time curves, mean interval loss and the leave-one-out experiment.

A ranking is evaluated on a held-out dataset by running algorithms in ranked
order (Top-N) and tracking the gap between the best accuracy found so far and
the best accuracy available on that dataset, as a function of cumulative
runtime. The mean interval loss (MIL) averages that step function over
``[t_min, t_max]``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
import numpy.typing as npt

from . import kernels
from .aggregation import baseline_arrays, incremental_arrays, order_indices
from .meta_data import PerformanceMatrix
from .omission import Mode, OmissionSpec, apply
from .ranking import rank_columns

__all__ = [
    "DEFAULT_PERCENTS",
    "DEFAULT_REPEATS",
    "LossTimeCurve",
    "MILCell",
    "MILConfig",
    "MILReport",
    "Method",
    "aggregate_curves",
    "build_loss_time_curve",
    "derive_seed",
    "loo_experiment",
    "mean_interval_loss",
]

logger = logging.getLogger(__name__)

DEFAULT_PERCENTS = (0.0, 5.0, 10.0, 20.0, 50.0, 90.0, 95.0)
DEFAULT_REPEATS = 10

FloatArray = npt.NDArray[np.float64]


class Method(str, Enum):
    AR = "AR"
    AR_MTA = "AR-MTA"

    @classmethod
    def parse(cls, value: str | Method) -> Method:
        if isinstance(value, Method):
            return value
        key = value.strip().upper().replace("_", "-")
        for m in cls:
            if m.value == key:
                return m
        raise ValueError(f"unknown method {value!r}; expected ar or ar-mta")


@dataclass(frozen=True, eq=False)
class LossTimeCurve:
    """Right-continuous, non-increasing step function of cumulative runtime.

    The loss is ``initial_loss`` before ``times[0]`` and ``losses[i]`` from
    ``times[i]`` until the next breakpoint.
    """

    times: FloatArray
    losses: FloatArray
    initial_loss: float

    def __post_init__(self) -> None:
        t = np.array(self.times, dtype=np.float64)
        loss = np.array(self.losses, dtype=np.float64)
        if t.shape != loss.shape or t.ndim != 1:
            raise ValueError("times and losses must be 1-d arrays of equal length")
        if t.size and (t[0] < 0 or np.any(np.diff(t) <= 0)):
            raise ValueError("times must be >= 0 and strictly increasing")
        if self.initial_loss < 0 or np.any(loss < 0):
            raise ValueError("losses must be >= 0")
        if t.size and (loss[0] > self.initial_loss or np.any(np.diff(loss) > 0)):
            raise ValueError("losses must be non-increasing")
        t.setflags(write=False)
        loss.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "losses", loss)
        object.__setattr__(self, "initial_loss", float(self.initial_loss))

    @property
    def breakpoints(self) -> list[tuple[float, float]]:
        return list(zip(self.times.tolist(), self.losses.tolist()))

    @property
    def final_loss(self) -> float:
        return float(self.losses[-1]) if self.losses.size else self.initial_loss

    def __call__(self, t: npt.ArrayLike) -> FloatArray:
        """Evaluate the step function at ``t``."""
        pos = np.searchsorted(self.times, np.asarray(t, dtype=np.float64), side="right") - 1
        values = np.concatenate(([self.initial_loss], self.losses))
        return values[pos + 1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LossTimeCurve):
            return NotImplemented
        return (
            self.initial_loss == other.initial_loss
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.losses, other.losses)
        )

    def shifted(self, dt: float) -> LossTimeCurve:
        return LossTimeCurve(self.times + dt, self.losses, self.initial_loss)


@dataclass(frozen=True)
class MILConfig:
    t_min: float = 10.0
    t_max: float = 1e4
    time_scale: str = "linear"

    def __post_init__(self) -> None:
        if not (self.t_min > 0 and self.t_max > self.t_min and math.isfinite(self.t_max)):
            raise ValueError("need 0 < t_min < t_max < inf")
        if self.time_scale not in ("linear", "log"):
            raise ValueError("time_scale must be 'linear' or 'log'")


def build_loss_time_curve(order: Sequence[str], matrix: PerformanceMatrix, heldout: str) -> LossTimeCurve:
    """Loss-time curve of running ``order`` on dataset ``heldout``.

    Algorithms without a result on the held-out dataset are skipped at no
    time cost. Before the first test completes the loss is the dataset's best
    accuracy.

    Raises:
        KeyError: unknown dataset or algorithm id.
        ValueError: empty order, or the held-out dataset has no results.
    """
    if not order:
        raise ValueError("order must be non-empty")
    j = matrix.dataset_index(heldout)
    a_idx = {a: i for i, a in enumerate(matrix.algorithms)}
    try:
        idx = np.array([a_idx[a] for a in order], dtype=np.int64)
    except KeyError as exc:
        raise KeyError(f"unknown algorithm {exc.args[0]!r}") from None
    times, losses, initial = kernels.loss_curve(matrix.accuracy[:, j], matrix.runtime[:, j], idx)
    return LossTimeCurve(times, losses, initial)


def mean_interval_loss(curve: LossTimeCurve, cfg: MILConfig = MILConfig()) -> float:
    """Time-weighted mean of the curve over ``[cfg.t_min, cfg.t_max]``.

    On the log scale the weighting is with respect to ``ln t``.
    """
    return float(
        kernels.interval_mean(
            curve.times, curve.losses, curve.initial_loss, cfg.t_min, cfg.t_max, cfg.time_scale == "log"
        )
    )


def aggregate_curves(curves: Sequence[LossTimeCurve]) -> LossTimeCurve:
    """Pointwise mean of step functions over the union of their breakpoints."""
    if not curves:
        raise ValueError("need at least one curve")
    if len(curves) == 1:
        return curves[0]
    grid = np.unique(np.concatenate([c.times for c in curves]))
    first = curves[0]
    # mean expressed as offset from the first curve: identical inputs come back unchanged
    head = first(grid)
    dev = sum(c(grid) - head for c in curves[1:]) / len(curves)
    losses = np.minimum.accumulate(np.maximum(head + dev, 0.0))
    init_dev = sum(c.initial_loss - first.initial_loss for c in curves[1:]) / len(curves)
    initial = max(first.initial_loss + init_dev, float(losses[0]) if losses.size else 0.0)
    return LossTimeCurve(grid, losses, initial)


def derive_seed(master_seed: int, fold: int, repetition: int) -> int:
    """Per-repetition omission seed: ``SeedSequence(master_seed, spawn_key=(fold, repetition))``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(fold, repetition))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class MILCell:
    """MIL of one (mode, method, percent) cell.

    ``per_fold_mils`` holds the MIL of each fold's repetition-averaged curve,
    ``per_repetition_mils`` the raw MIL of every repetition of every fold.
    """

    mean_mil: float
    per_fold_mils: list[float]
    per_repetition_mils: list[list[float]]
    fold_ids: list[str]
    n_skipped: int

    @property
    def n_folds(self) -> int:
        return len(self.per_fold_mils)


@dataclass(frozen=True)
class MILReport:
    cells: dict[tuple[str, str, float], MILCell]
    config: dict
    curves: dict[tuple[str, str, float, str], LossTimeCurve] = field(default_factory=dict, repr=False)

    def rows(self, mode: str | Mode) -> dict[str, dict[float, tuple[float, list[float]]]]:
        """Table-shaped view for one omission mode: method -> percent -> (mean, per-fold)."""
        mode = Mode.parse(mode).value
        out: dict[str, dict[float, tuple[float, list[float]]]] = {}
        for (m, method, pct), cell in self.cells.items():
            if m == mode:
                out.setdefault(method, {})[pct] = (cell.mean_mil, cell.per_fold_mils)
        return out

    def mean(self, mode: str | Mode, method: str | Method, percent: float) -> float:
        return self.cells[(Mode.parse(mode).value, Method.parse(method).value, float(percent))].mean_mil

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["mode", "method", "percent", "mean_mil", "n_folds", "n_skipped"])
            for (mode, method, pct), cell in self.cells.items():
                w.writerow([mode, method, _fmt(pct), repr(cell.mean_mil), cell.n_folds, cell.n_skipped])

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "cells": [
                {
                    "mode": mode,
                    "method": method,
                    "percent": pct,
                    "mean_mil": cell.mean_mil,
                    "n_folds": cell.n_folds,
                    "n_skipped": cell.n_skipped,
                    "fold_ids": cell.fold_ids,
                    "per_fold_mils": cell.per_fold_mils,
                    "per_repetition_mils": cell.per_repetition_mils,
                }
                for (mode, method, pct), cell in self.cells.items()
            ],
        }

    def to_json(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def curves_to_csv(self, path: str | Path) -> None:
        """Long-format per-fold curves; the first row of each curve is (0, initial_loss)."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["mode", "method", "percent", "fold", "time_seconds", "loss"])
            for (mode, method, pct, fold), curve in self.curves.items():
                w.writerow([mode, method, _fmt(pct), fold, "0.0", repr(curve.initial_loss)])
                for t, loss in curve.breakpoints:
                    w.writerow([mode, method, _fmt(pct), fold, repr(t), repr(loss)])


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _grid(grid: Iterable[OmissionSpec | tuple[str | Mode, float]]) -> list[tuple[Mode, float]]:
    out = []
    for item in grid:
        if isinstance(item, OmissionSpec):
            out.append((item.mode, float(item.percent)))
        else:
            mode, pct = item
            spec = OmissionSpec(Mode.parse(mode), float(pct))
            out.append((spec.mode, spec.percent))
    if not out:
        raise ValueError("empty omission grid")
    return out


def _run_fold(matrix, fold, methods, grid, repeats, cfg, master_seed):
    """Evaluate every (mode, percent, method) for one held-out dataset."""
    acc = matrix.accuracy[:, fold]
    rt = matrix.runtime[:, fold]
    train = matrix.select_datasets(j for j in range(len(matrix.datasets)) if j != fold)
    n_max = len(matrix.algorithms)
    log_scale = cfg.time_scale == "log"
    out = {}
    for mode, pct in grid:
        per_method = {m: [] for m in methods}
        skipped = 0
        for rep in range(repeats):
            degraded = apply(train, OmissionSpec(mode, pct, derive_seed(master_seed, fold, rep)))
            ranks = rank_columns(degraded.accuracy).T
            ranks = ranks[~np.isnan(ranks).all(axis=1)]
            if ranks.shape[0] == 0:
                skipped += 1
                continue
            for method in methods:
                if method is Method.AR:
                    rank, weight, count = baseline_arrays(ranks)
                else:
                    rank, weight, count = incremental_arrays(ranks, n_max)
                order = order_indices(rank, weight, count, matrix.algorithms)
                times, losses, initial = kernels.loss_curve(acc, rt, order)
                curve = LossTimeCurve(times, losses, initial)
                mil = kernels.interval_mean(times, losses, initial, cfg.t_min, cfg.t_max, log_scale)
                per_method[method].append((curve, float(mil)))
        for method in methods:
            runs = per_method[method]
            if not runs:
                out[(mode, method, pct)] = (None, [], skipped)
                continue
            curve = aggregate_curves([c for c, _ in runs])
            out[(mode, method, pct)] = (curve, [m for _, m in runs], skipped)
    return out


def loo_experiment(
    matrix: PerformanceMatrix,
    methods: Iterable[str | Method] = (Method.AR, Method.AR_MTA),
    grid: Iterable[OmissionSpec | tuple[str | Mode, float]] = tuple((Mode.MTA, p) for p in DEFAULT_PERCENTS),
    repeats: int = DEFAULT_REPEATS,
    cfg: MILConfig = MILConfig(),
    master_seed: int = 0,
    workers: int = 1,
) -> MILReport:
    """Leave-one-dataset-out evaluation under repeated random omissions.

    For every held-out dataset, omission setting and repetition, the remaining
    datasets are degraded, ranked and aggregated by each method; the aggregate
    order is run on the held-out dataset to give a loss-time curve. Each fold's
    repetition curves are averaged before taking the MIL; the reported value is
    the mean over folds.

    Repetitions whose degraded matrix has no results left are skipped and
    counted. Held-out datasets without results are not used as folds. The
    report is a pure function of the arguments, independent of ``workers``.
    """
    methods = sorted({Method.parse(m) for m in methods}, key=lambda m: m.value)
    if not methods:
        raise ValueError("no methods given")
    grid = _grid(grid)
    if repeats < 1:
        raise ValueError("repeats must be positive")
    if len(matrix.datasets) < 2:
        raise ValueError("need at least two datasets")
    folds = [j for j in range(len(matrix.datasets)) if not np.isnan(matrix.accuracy[:, j]).all()]

    def run(fold):
        return _run_fold(matrix, fold, methods, grid, repeats, cfg, master_seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, folds))
    else:
        results = [run(f) for f in folds]

    cells: dict[tuple[str, str, float], MILCell] = {}
    curves: dict[tuple[str, str, float, str], LossTimeCurve] = {}
    for mode, pct in grid:
        for method in methods:
            key = (mode, method, pct)
            fold_mils, rep_mils, fold_ids, n_skipped = [], [], [], 0
            for fold, res in zip(folds, results):
                curve, reps, skipped = res[key]
                n_skipped += skipped
                if curve is None:
                    continue
                ds = matrix.datasets[fold]
                fold_mils.append(mean_interval_loss(curve, cfg))
                rep_mils.append(reps)
                fold_ids.append(ds)
                curves[(mode.value, method.value, pct, ds)] = curve
            if n_skipped:
                logger.warning("%s %s %g%%: %d repetition(s) skipped", mode.value, method.value, pct, n_skipped)
            if not fold_mils:
                continue
            cells[(mode.value, method.value, pct)] = MILCell(
                float(np.mean(fold_mils)), fold_mils, rep_mils, fold_ids, n_skipped
            )
    config = {
        "methods": [m.value for m in methods],
        "grid": [{"mode": m.value, "percent": p} for m, p in grid],
        "repeats": repeats,
        "t_min": cfg.t_min,
        "t_max": cfg.t_max,
        "time_scale": cfg.time_scale,
        "master_seed": master_seed,
        "n_algorithms": len(matrix.algorithms),
        "n_datasets": len(matrix.datasets),
    }
    return MILReport(cells, config, curves)

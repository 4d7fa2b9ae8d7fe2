"""Meta-dataset model: algorithms x datasets grid of (accuracy, runtime) cells.

Absent test results are absent cells; there is no sentinel value. Internally the
grid is held as two dense float arrays with ``NaN`` marking absent cells, which
is what the omission simulators and the evaluation harness operate on.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import numpy.typing as npt
from scipy.stats import rankdata

__all__ = [
    "CSV_HEADER",
    "MatrixFormatError",
    "PerformanceMatrix",
    "RunRecord",
    "SyntheticSpec",
    "calibrate_noise_scale",
    "generate_synthetic",
    "load_matrix",
    "save_matrix",
]

CSV_HEADER = ("dataset_id", "algorithm_id", "accuracy", "runtime_seconds")

FloatArray = npt.NDArray[np.float64]


class MatrixFormatError(ValueError):
    """Raised when a meta-dataset file or record set violates the schema."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class RunRecord:
    """One test result: an algorithm evaluated on a dataset."""

    dataset_id: str
    algorithm_id: str
    accuracy: float
    runtime_seconds: float

    def __post_init__(self) -> None:
        if not self.dataset_id or not self.algorithm_id:
            raise MatrixFormatError("dataset_id and algorithm_id must be non-empty")
        if not (math.isfinite(self.accuracy) and 0.0 <= self.accuracy <= 1.0):
            raise MatrixFormatError(f"accuracy {self.accuracy!r} outside [0, 1]")
        if not (math.isfinite(self.runtime_seconds) and self.runtime_seconds > 0.0):
            raise MatrixFormatError(f"runtime_seconds {self.runtime_seconds!r} must be > 0")


def _frozen(a: npt.ArrayLike) -> FloatArray:
    out = np.array(a, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PerformanceMatrix:
    """Immutable algorithms x datasets grid of optional (accuracy, runtime) cells.

    ``accuracy[i, j]`` and ``runtime[i, j]`` hold the result of
    ``algorithms[i]`` on ``datasets[j]``; both are ``NaN`` where the test result
    is absent. A dataset column may be entirely absent.
    """

    algorithms: tuple[str, ...]
    datasets: tuple[str, ...]
    accuracy: FloatArray = field(repr=False)
    runtime: FloatArray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "datasets", tuple(self.datasets))
        shape = (len(self.algorithms), len(self.datasets))
        acc = _frozen(self.accuracy).reshape(shape)
        rt = _frozen(self.runtime).reshape(shape)
        if len(set(self.algorithms)) != len(self.algorithms):
            raise MatrixFormatError("duplicate algorithm ids")
        if len(set(self.datasets)) != len(self.datasets):
            raise MatrixFormatError("duplicate dataset ids")
        if not np.array_equal(np.isnan(acc), np.isnan(rt)):
            raise MatrixFormatError("accuracy and runtime must be absent together")
        present = ~np.isnan(acc)
        if np.any((acc[present] < 0.0) | (acc[present] > 1.0)):
            raise MatrixFormatError("accuracy outside [0, 1]")
        if np.any(~np.isfinite(rt[present]) | (rt[present] <= 0.0)):
            raise MatrixFormatError("runtime_seconds must be finite and > 0")
        object.__setattr__(self, "accuracy", acc)
        object.__setattr__(self, "runtime", rt)

    @classmethod
    def from_records(
        cls,
        records: Iterable[RunRecord],
        algorithms: Iterable[str] | None = None,
        datasets: Iterable[str] | None = None,
    ) -> PerformanceMatrix:
        """Build a matrix from records; id lists default to the sorted ids seen."""
        records = list(records)
        seen: set[tuple[str, str]] = set()
        for rec in records:
            key = (rec.dataset_id, rec.algorithm_id)
            if key in seen:
                raise MatrixFormatError(f"duplicate (dataset, algorithm) pair {key}")
            seen.add(key)
        algs = tuple(sorted({r.algorithm_id for r in records})) if algorithms is None else tuple(algorithms)
        dss = tuple(sorted({r.dataset_id for r in records})) if datasets is None else tuple(datasets)
        a_idx = {a: i for i, a in enumerate(algs)}
        d_idx = {d: j for j, d in enumerate(dss)}
        acc = np.full((len(algs), len(dss)), np.nan)
        rt = np.full((len(algs), len(dss)), np.nan)
        for rec in records:
            try:
                i, j = a_idx[rec.algorithm_id], d_idx[rec.dataset_id]
            except KeyError as exc:
                raise MatrixFormatError(f"record id {exc.args[0]!r} not in the id lists") from None
            acc[i, j] = rec.accuracy
            rt[i, j] = rec.runtime_seconds
        return cls(algs, dss, acc, rt)

    @property
    def shape(self) -> tuple[int, int]:
        return self.accuracy.shape  # type: ignore[return-value]

    @property
    def present(self) -> npt.NDArray[np.bool_]:
        """Boolean mask of present cells, shape (n_algorithms, n_datasets)."""
        return ~np.isnan(self.accuracy)

    @property
    def n_present(self) -> int:
        return int(self.present.sum())

    def dataset_index(self, dataset_id: str) -> int:
        try:
            return self.datasets.index(dataset_id)
        except ValueError:
            raise KeyError(f"unknown dataset {dataset_id!r}") from None

    def cells(self) -> dict[tuple[str, str], tuple[float, float]]:
        """Map of present cells keyed by (dataset_id, algorithm_id)."""
        return {
            (r.dataset_id, r.algorithm_id): (r.accuracy, r.runtime_seconds)
            for r in self.records()
        }

    def records(self) -> Iterator[RunRecord]:
        """Present cells as records, sorted by (dataset_id, algorithm_id)."""
        a_order = sorted(range(len(self.algorithms)), key=self.algorithms.__getitem__)
        d_order = sorted(range(len(self.datasets)), key=self.datasets.__getitem__)
        for j in d_order:
            for i in a_order:
                acc = self.accuracy[i, j]
                if not math.isnan(acc):
                    yield RunRecord(self.datasets[j], self.algorithms[i], float(acc), float(self.runtime[i, j]))

    def masked(self, keep: npt.NDArray[np.bool_]) -> PerformanceMatrix:
        """Return a copy keeping only cells where ``keep`` is true; id lists unchanged."""
        keep = np.asarray(keep, dtype=bool)
        acc = np.where(keep, self.accuracy, np.nan)
        rt = np.where(keep, self.runtime, np.nan)
        return PerformanceMatrix(self.algorithms, self.datasets, acc, rt)

    def select_datasets(self, indices: Iterable[int]) -> PerformanceMatrix:
        idx = list(indices)
        return PerformanceMatrix(
            self.algorithms,
            tuple(self.datasets[j] for j in idx),
            self.accuracy[:, idx],
            self.runtime[:, idx],
        )

    def same_cells(self, other: PerformanceMatrix) -> bool:
        """True when both matrices hold the same present cells with identical values."""
        return self.cells() == other.cells()


def _parse_float(text: str, name: str, line: int) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise MatrixFormatError(f"cannot parse {name} {text!r}", line) from None
    if not math.isfinite(value):
        raise MatrixFormatError(f"{name} must be finite, got {text!r}", line)
    return value


def load_matrix(path: str | Path, format: str = "csv") -> PerformanceMatrix:
    """Read a meta-dataset file.

    The CSV must start with the header ``dataset_id,algorithm_id,accuracy,runtime_seconds``.
    Rows may come in any order; algorithm and dataset lists are sorted
    lexicographically. A row whose accuracy and runtime are both blank declares
    the pair as absent; it only serves to register ids that have no results
    (e.g. a dataset emptied by MTD).

    Raises:
        MatrixFormatError: on a bad header, unparsable row, duplicate pair,
            accuracy outside [0, 1] or non-positive runtime. The message
            carries the 1-based line number.
    """
    if format != "csv":
        raise ValueError(f"unsupported format {format!r}")
    records: list[RunRecord] = []
    algorithms: set[str] = set()
    datasets: set[str] = set()
    seen: dict[tuple[str, str], int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise MatrixFormatError(f"expected header {','.join(CSV_HEADER)}", 1)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(CSV_HEADER):
                raise MatrixFormatError(f"expected {len(CSV_HEADER)} fields, got {len(row)}", line)
            ds, alg = row[0].strip(), row[1].strip()
            if not ds or not alg:
                raise MatrixFormatError("dataset_id and algorithm_id must be non-empty", line)
            key = (ds, alg)
            if key in seen:
                raise MatrixFormatError(f"duplicate pair {key} (first seen on line {seen[key]})", line)
            seen[key] = line
            datasets.add(ds)
            algorithms.add(alg)
            acc_text, rt_text = row[2].strip(), row[3].strip()
            if not acc_text and not rt_text:
                continue
            acc = _parse_float(acc_text, "accuracy", line)
            rt = _parse_float(rt_text, "runtime_seconds", line)
            try:
                records.append(RunRecord(ds, alg, acc, rt))
            except MatrixFormatError as exc:
                raise MatrixFormatError(str(exc), line) from None
    return PerformanceMatrix.from_records(records, sorted(algorithms), sorted(datasets))


def save_matrix(matrix: PerformanceMatrix, path: str | Path) -> None:
    """Write the matrix as CSV sorted by (dataset_id, algorithm_id).

    Present cells are written with ``repr`` floats so a load/save round trip is
    exact. Ids without any present cell get one blank declaration row so the
    algorithm and dataset lists survive the round trip too.
    """
    rows = [
        (r.dataset_id, r.algorithm_id, repr(r.accuracy), repr(r.runtime_seconds))
        for r in matrix.records()
    ]
    present = matrix.present
    algs = sorted(matrix.algorithms)
    dss = sorted(matrix.datasets)
    a_has = {a: bool(present[i].any()) for i, a in enumerate(matrix.algorithms)}
    d_has = {d: bool(present[:, j].any()) for j, d in enumerate(matrix.datasets)}
    declared = set()
    for d in dss:
        if not d_has[d] and algs:
            declared.add((d, algs[0]))
    for a in algs:
        if not a_has[a] and dss:
            declared.add((dss[0], a))
    rows.extend((d, a, "", "") for d, a in declared)
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for a synthetic complete meta-dataset.

    ``noise_scale`` controls how much per-dataset rankings deviate from a shared
    latent algorithm quality. Leave it as ``None`` to have it calibrated so the
    mean pairwise Spearman correlation hits ``target_mean_spearman``.
    ``heterogeneity`` spreads the noise level across datasets (log-normal
    multiplier), which widens the distribution of pairwise correlations; the
    default puts its standard deviation near 0.27 at a mean of 0.51.
    ``runtime_log_range`` is in log10 seconds.
    """

    n_algorithms: int = 53
    n_datasets: int = 39
    target_mean_spearman: float = 0.5134
    noise_scale: float | None = None
    runtime_log_range: tuple[float, float] = (-1.0, 3.0)
    seed: int = 0
    heterogeneity: float = 1.3

    def __post_init__(self) -> None:
        if self.n_algorithms < 2:
            raise ValueError("n_algorithms must be >= 2")
        if self.n_datasets < 1:
            raise ValueError("n_datasets must be >= 1")
        if not -1.0 <= self.target_mean_spearman <= 1.0:
            raise ValueError("target_mean_spearman must lie in [-1, 1]")
        if self.noise_scale is not None and not (math.isfinite(self.noise_scale) and self.noise_scale >= 0):
            raise ValueError("noise_scale must be finite and >= 0")
        if not (math.isfinite(self.heterogeneity) and self.heterogeneity >= 0):
            raise ValueError("heterogeneity must be finite and >= 0")
        lo, hi = self.runtime_log_range
        if not lo < hi:
            raise ValueError("runtime_log_range must satisfy low < high")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class _Draws:
    quality: FloatArray
    noise: FloatArray
    floor: FloatArray
    ceiling: FloatArray
    log_runtime: FloatArray
    spread: FloatArray


def _draw(spec: SyntheticSpec) -> _Draws:
    # Draw order is fixed so calibration sees common random numbers across noise levels.
    rng = np.random.default_rng(spec.seed)
    n_a, n_d = spec.n_algorithms, spec.n_datasets
    quality = rng.standard_normal(n_a)
    noise = rng.standard_normal((n_a, n_d))
    floor = rng.uniform(0.3, 0.7, n_d)
    ceiling = rng.uniform(0.85, 1.0, n_d)
    log_runtime = rng.uniform(*spec.runtime_log_range, size=(n_a, n_d))
    spread = np.exp(spec.heterogeneity * rng.standard_normal(n_d))
    return _Draws(quality, noise, floor, ceiling, log_runtime, spread)


def _scores(draws: _Draws, noise_scale: float) -> FloatArray:
    sigma = noise_scale * draws.spread
    score = draws.quality[:, None] + sigma[None, :] * draws.noise
    return score / np.sqrt(1.0 + sigma**2)[None, :]


def _mean_spearman_complete(values: FloatArray) -> float:
    """Mean pairwise Spearman between columns of a complete (n_items, n_cols) array."""
    if values.shape[1] < 2:
        return 1.0
    ranks = rankdata(values, axis=0)
    corr = np.corrcoef(ranks, rowvar=False)
    iu = np.triu_indices(values.shape[1], k=1)
    return float(np.mean(corr[iu]))


def calibrate_noise_scale(spec: SyntheticSpec, tol: float = 1e-4, max_iter: int = 100) -> float:
    """Bisect ``noise_scale`` so the generated matrix's mean pairwise Spearman hits the target.

    The search reuses the spec's seed, so the measured correlation is a
    deterministic, non-increasing function of the noise level.
    """
    target = spec.target_mean_spearman
    draws = _draw(spec)

    def measure(scale: float) -> float:
        return _mean_spearman_complete(_scores(draws, scale))

    if target >= measure(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while measure(hi) > target:
        hi *= 2.0
        if hi > 1e4:
            raise ValueError(f"target mean Spearman {target} is not reachable for this spec")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if measure(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def _logistic(x: FloatArray) -> FloatArray:
    return 1.0 / (1.0 + np.exp(-x))


def generate_synthetic(spec: SyntheticSpec) -> PerformanceMatrix:
    """Generate a complete synthetic meta-dataset.

    Each algorithm gets a latent quality; each dataset perturbs it with Gaussian
    noise of size ``noise_scale`` and maps the score into that dataset's
    accuracy band. Runtimes are log-uniform over ``runtime_log_range``.
    The result is a pure function of ``spec``.
    """
    scale = spec.noise_scale if spec.noise_scale is not None else calibrate_noise_scale(spec)
    draws = _draw(spec)
    score = _scores(draws, scale)
    accuracy = draws.floor + (draws.ceiling - draws.floor) * _logistic(2.0 * score)
    runtime = 10.0 ** draws.log_runtime
    width_a = len(str(spec.n_algorithms))
    width_d = len(str(spec.n_datasets))
    algorithms = tuple(f"a{i + 1:0{width_a}d}" for i in range(spec.n_algorithms))
    datasets = tuple(f"d{j + 1:0{width_d}d}" for j in range(spec.n_datasets))
    return PerformanceMatrix(algorithms, datasets, accuracy, runtime)


def summarize(matrix: PerformanceMatrix) -> Mapping[str, int]:
    """Counts used in logs and manifests."""
    return {
        "n_algorithms": len(matrix.algorithms),
        "n_datasets": len(matrix.datasets),
        "n_present": matrix.n_present,
    }

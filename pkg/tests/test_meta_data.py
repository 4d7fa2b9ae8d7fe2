import numpy as np
import pytest
from conftest import ALGS, DATASETS, TABLE1, table1_matrix

from rankbench.meta_data import (
    MatrixFormatError,
    PerformanceMatrix,
    RunRecord,
    SyntheticSpec,
    _mean_spearman_complete,
    calibrate_noise_scale,
    generate_synthetic,
    load_matrix,
    save_matrix,
)
from rankbench.ranking import characterize

HEADER = "dataset_id,algorithm_id,accuracy,runtime_seconds\n"


def write(tmp_path, body, name="m.csv"):
    p = tmp_path / name
    p.write_text(HEADER + body, encoding="utf-8")
    return p


def table1_csv(tmp_path):
    lines = []
    for a in ALGS:
        for d, v in zip(DATASETS, TABLE1[a]):
            lines.append(f"{d},{a},,\n" if v is None else f"{d},{a},{v},10\n")
    lines.reverse()  # row order must not matter
    return write(tmp_path, "".join(lines))


class TestLoad:
    def test_table1_counts(self, tmp_path):
        m = load_matrix(table1_csv(tmp_path))
        assert m.n_present == 24
        assert m.shape[0] * m.shape[1] - m.n_present == 12
        assert m.algorithms == ALGS
        assert m.datasets == DATASETS
        assert not m.present[:, 1].any() and not m.present[:, 4].any()

    def test_values(self, tmp_path):
        m = load_matrix(table1_csv(tmp_path))
        assert m.cells()[("D4", "a1")] == (0.98, 10.0)

    def test_header_only(self, tmp_path):
        m = load_matrix(write(tmp_path, ""))
        assert m.algorithms == () and m.datasets == ()
        assert m.n_present == 0

    def test_duplicate_pair(self, tmp_path):
        p = write(tmp_path, "D1,a1,0.5,1\nD2,a1,0.5,1\nD1,a1,0.6,2\n")
        with pytest.raises(MatrixFormatError, match="duplicate") as exc:
            load_matrix(p)
        assert exc.value.line == 4

    @pytest.mark.parametrize(
        "row, match",
        [
            ("D1,a1,1.5,1\n", "accuracy"),
            ("D1,a1,-0.1,1\n", "accuracy"),
            ("D1,a1,0.5,0\n", "runtime"),
            ("D1,a1,0.5,-3\n", "runtime"),
            ("D1,a1,abc,1\n", "parse"),
            ("D1,a1,nan,1\n", "finite"),
            ("D1,a1,0.5\n", "fields"),
            ("D1,a1,0.5,\n", "parse"),
            (",a1,0.5,1\n", "non-empty"),
        ],
    )
    def test_bad_rows(self, tmp_path, row, match):
        p = write(tmp_path, "D0,a0,0.5,1\n" + row)
        with pytest.raises(MatrixFormatError, match=match) as exc:
            load_matrix(p)
        assert exc.value.line == 3

    def test_bad_header(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("dataset,algorithm,acc,rt\nD1,a1,0.5,1\n")
        with pytest.raises(MatrixFormatError, match="header"):
            load_matrix(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_matrix(tmp_path / "nope.csv")


class TestRoundTrip:
    def test_table1(self, tmp_path):
        m = table1_matrix()
        save_matrix(m, tmp_path / "out.csv")
        back = load_matrix(tmp_path / "out.csv")
        assert back.same_cells(m)
        assert back.datasets == m.datasets and back.algorithms == m.algorithms

    def test_synthetic_exact_floats(self, tmp_path):
        m = generate_synthetic(SyntheticSpec(n_algorithms=7, n_datasets=5, noise_scale=0.7, seed=3))
        save_matrix(m, tmp_path / "a.csv")
        back = load_matrix(tmp_path / "a.csv")
        assert back.same_cells(m)
        save_matrix(back, tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_writer_sorted(self, tmp_path):
        save_matrix(table1_matrix(), tmp_path / "out.csv")
        rows = (tmp_path / "out.csv").read_text().splitlines()[1:]
        keys = [tuple(r.split(",")[:2]) for r in rows]
        assert keys == sorted(keys)


class TestPerformanceMatrix:
    def test_immutable(self):
        m = table1_matrix()
        with pytest.raises(ValueError):
            m.accuracy[0, 0] = 0.1

    def test_duplicate_ids(self):
        with pytest.raises(MatrixFormatError):
            PerformanceMatrix(("a", "a"), ("d",), [[0.5], [0.6]], [[1.0], [1.0]])

    def test_mismatched_absence(self):
        with pytest.raises(MatrixFormatError):
            PerformanceMatrix(("a",), ("d",), [[0.5]], [[np.nan]])

    def test_from_records_duplicate(self):
        recs = [RunRecord("d", "a", 0.5, 1.0), RunRecord("d", "a", 0.6, 1.0)]
        with pytest.raises(MatrixFormatError):
            PerformanceMatrix.from_records(recs)

    def test_record_validation(self):
        with pytest.raises(MatrixFormatError):
            RunRecord("d", "a", 1.2, 1.0)


class TestSynthetic:
    def test_zero_noise_identical_rankings(self):
        m = generate_synthetic(SyntheticSpec(n_algorithms=20, n_datasets=8, noise_scale=0.0, seed=1))
        assert m.n_present == 160
        ch = characterize(m)
        assert ch.mean == pytest.approx(1.0, abs=1e-12)
        assert ch.sd == pytest.approx(0.0, abs=1e-12)
        orders = {tuple(np.argsort(-m.accuracy[:, j])) for j in range(8)}
        assert len(orders) == 1

    def test_calibrated_default(self):
        spec = SyntheticSpec(n_algorithms=53, n_datasets=39, target_mean_spearman=0.51, seed=42)
        m = generate_synthetic(spec)
        assert m.shape == (53, 39) and m.n_present == 53 * 39
        assert characterize(m).mean == pytest.approx(0.51, abs=0.1)
        # calibration is tight, far inside the contract's tolerance
        assert characterize(m).mean == pytest.approx(0.51, abs=0.005)

    def test_deterministic(self):
        spec = SyntheticSpec(seed=42, target_mean_spearman=0.51)
        a, b = generate_synthetic(spec), generate_synthetic(spec)
        assert np.array_equal(a.accuracy, b.accuracy) and np.array_equal(a.runtime, b.runtime)
        c = generate_synthetic(SyntheticSpec(seed=43, target_mean_spearman=0.51))
        assert not np.array_equal(a.accuracy, c.accuracy)

    def test_runtime_range(self):
        m = generate_synthetic(SyntheticSpec(n_algorithms=10, n_datasets=10, noise_scale=1.0, runtime_log_range=(0.0, 2.0)))
        assert m.runtime.min() >= 1.0 and m.runtime.max() <= 100.0

    @pytest.mark.parametrize("seed", range(20))
    def test_noise_monotone(self, seed):
        means = [
            _mean_spearman_complete(generate_synthetic(SyntheticSpec(n_algorithms=15, n_datasets=10, noise_scale=s, seed=seed)).accuracy)
            for s in (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)
        ]
        assert all(b <= a + 1e-12 for a, b in zip(means, means[1:]))

    def test_calibration_matches_characterize(self):
        spec = SyntheticSpec(n_algorithms=30, n_datasets=12, target_mean_spearman=0.3, seed=5)
        scale = calibrate_noise_scale(spec)
        m = generate_synthetic(SyntheticSpec(n_algorithms=30, n_datasets=12, noise_scale=scale, seed=5))
        assert characterize(m).mean == pytest.approx(_mean_spearman_complete(m.accuracy), abs=1e-12)
        assert characterize(m).mean == pytest.approx(0.3, abs=0.01)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_algorithms": 1},
            {"n_datasets": 0},
            {"target_mean_spearman": 1.5},
            {"noise_scale": -1.0},
            {"runtime_log_range": (2.0, 1.0)},
            {"seed": -1},
            {"seed": 2**64},
        ],
    )
    def test_invalid_spec(self, kwargs):
        with pytest.raises(ValueError):
            SyntheticSpec(**kwargs)

    def test_unreachable_target(self):
        with pytest.raises(ValueError, match="not reachable"):
            calibrate_noise_scale(SyntheticSpec(n_algorithms=10, n_datasets=6, target_mean_spearman=-0.9))

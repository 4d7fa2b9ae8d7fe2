"""Exit criteria. Each test carries a ``criterion`` marker; a PASS/FAIL line per
criterion is printed in the terminal summary."""

import os
import time
from pathlib import Path

import numpy as np
import pytest
from conftest import table1_matrix
from oracles import random_grid_curve, riemann_mil
from scipy.stats import rankdata

from rankbench.aggregation import (
    aggregate_baseline_ar,
    aggregate_closed_form,
    aggregate_incremental,
    ranking_weight,
)
from rankbench.cli import main
from rankbench.evaluation import LossTimeCurve, MILConfig, loo_experiment, mean_interval_loss
from rankbench.meta_data import SyntheticSpec, generate_synthetic, save_matrix
from rankbench.omission import Mode, OmissionSpec, apply_mta, apply_mtd
from rankbench.ranking import Ranking

OPENML_ENV = "RANKBENCH_OPENML_CSV"
OPENML_DEFAULT = Path(__file__).parent / "data" / "openml_meta.csv"


def note(request, text):
    request.node.user_properties.append(("detail", text))


@pytest.mark.criterion(1, "worked example: AR-MTA a2=(3.5, 1.2), AR a2=2.5")
def test_c1_worked_example(request, r1, r2):
    mta = aggregate_incremental([r1, r2], 6)
    ar = aggregate_baseline_ar([r1, r2])
    note(request, f"AR-MTA a2={mta['a2'].rank!r},{mta['a2'].weight!r}; AR a2={ar['a2'].rank!r}")
    assert abs(mta["a2"].rank - 3.5) <= 1e-9
    assert abs(mta["a2"].weight - 1.2) <= 1e-9
    assert ar["a2"].rank == 2.5


@pytest.mark.criterion(2, "ranking weight: (6,6)=1 and (2,6)=0.2 exactly")
def test_c2_weight_formula():
    assert ranking_weight(6, 6) == 1.0
    assert ranking_weight(2, 6) == 0.2


def _random_rankings(rng):
    k = int(rng.integers(2, 11))
    m = int(rng.integers(1, 11))
    items = [f"a{i}" for i in range(k)]
    out = []
    for _ in range(m):
        n = int(rng.integers(1, k + 1))
        subset = rng.choice(items, size=n, replace=False)
        scores = rng.integers(0, 5, size=n)
        out.append(Ranking(dict(zip(subset.tolist(), rankdata(-scores).tolist())), k))
    return k, out


@pytest.mark.criterion(3, "incremental == closed form within 1e-9 and permutation invariant, 250 cases, < 5 s")
def test_c3_oracle_equivalence(request):
    rng = np.random.default_rng(20160623)
    start = time.perf_counter()
    worst = 0.0
    n_cases = 250
    for _ in range(n_cases):
        k, rankings = _random_rankings(rng)
        inc = aggregate_incremental(rankings, k)
        ref = aggregate_closed_form(rankings, k)
        perm = aggregate_incremental([rankings[i] for i in rng.permutation(len(rankings))], k)
        assert set(inc.entries) == set(ref.entries) == set(perm.entries)
        for a in inc.entries:
            for other in (ref, perm):
                worst = max(worst, abs(inc[a].rank - other[a].rank), abs(inc[a].weight - other[a].weight))
    elapsed = time.perf_counter() - start
    note(request, f"max deviation {worst:.2e}, {elapsed:.2f} s")
    assert worst <= 1e-9
    assert elapsed < 5.0


@pytest.mark.criterion(4, "omission counts reproduce the published kept-dataset / kept-test rows")
def test_c4_omission_counts(request):
    percents = (5, 10, 20, 50, 90, 95)
    published_datasets = (36, 34, 30, 19, 4, 2)
    published_tests = (50, 48, 43, 26, 5, 3)
    matrix = generate_synthetic(SyntheticSpec(n_algorithms=53, n_datasets=38, noise_scale=1.0, seed=1))
    got_d, got_t = [], []
    for pct in percents:
        got_d.append(int(apply_mtd(matrix, OmissionSpec(Mode.MTD, pct, seed=pct)).present.any(axis=0).sum()))
        per_ds = apply_mta(matrix, OmissionSpec(Mode.MTA, pct, seed=pct)).present.sum(axis=0)
        assert len(set(per_ds.tolist())) == 1
        got_t.append(int(per_ds[0]))
    deviations = {p: (ours, pub) for p, ours, pub in zip(percents, got_t, published_tests) if ours != pub}
    note(request, f"datasets {got_d}; tests {got_t}; deviations from the published row {deviations}")
    assert tuple(got_d) == published_datasets
    # the only documented deviation: 53 at 20 % -> 42 here, 43 in the published table
    assert deviations == {20: (42, 43)}


@pytest.mark.criterion(5, "MIL matches 1e5-sample Riemann sum within 1e-6 (linear + log, 2x100 curves); MIL(const L) == L")
def test_c5_mil_correctness(request):
    rng = np.random.default_rng(7)
    worst = {}
    for scale in ("linear", "log"):
        cfg = MILConfig(10.0, 1e4, scale)
        worst[scale] = 0.0
        for _ in range(100):
            c = random_grid_curve(rng, 100_000, scale == "log")
            oracle = riemann_mil(c.times, c.losses, c.initial_loss, cfg.t_min, cfg.t_max, scale == "log")
            worst[scale] = max(worst[scale], abs(mean_interval_loss(c, cfg) - oracle))
        for loss in rng.uniform(0, 1, 50).tolist() + [0.0, 1.0]:
            assert mean_interval_loss(LossTimeCurve([], [], loss), cfg) == loss
            assert mean_interval_loss(LossTimeCurve([0.5, 2e4], [loss, 0.0], 1.0), cfg) == loss
    note(request, f"max |MIL - Riemann| linear {worst['linear']:.1e}, log {worst['log']:.1e}")
    assert worst["linear"] <= 1e-6 and worst["log"] <= 1e-6


@pytest.mark.criterion(6, "at 0% omissions AR and AR-MTA MIL columns are exactly equal")
@pytest.mark.parametrize(
    "matrix_factory",
    [
        table1_matrix,
        lambda: generate_synthetic(SyntheticSpec(n_algorithms=53, n_datasets=39, target_mean_spearman=0.51, seed=0)),
        lambda: generate_synthetic(SyntheticSpec(n_algorithms=7, n_datasets=9, noise_scale=3.0, seed=1)),
        lambda: generate_synthetic(SyntheticSpec(n_algorithms=20, n_datasets=5, noise_scale=0.0, seed=2)),
    ],
    ids=["table1", "synthetic-53x39", "synthetic-noisy", "synthetic-noiseless"],
)
def test_c6_reduction(request, matrix_factory):
    matrix = matrix_factory()
    report = loo_experiment(matrix, grid=[("mta", 0), ("mtd", 0)], repeats=2, master_seed=3)
    for mode in ("MTA", "MTD"):
        ar = report.cells[(mode, "AR", 0.0)]
        mta = report.cells[(mode, "AR-MTA", 0.0)]
        assert ar.per_fold_mils == mta.per_fold_mils
        assert ar.per_repetition_mils == mta.per_repetition_mils
        assert ar.mean_mil == mta.mean_mil
    note(request, f"MIL={report.mean('mta', 'AR', 0)!r}")


@pytest.mark.criterion(7, "synthetic 53x39, MTA 50%/90%: MIL(AR-MTA) < MIL(AR) in >= 8 of 10 seeds")
def test_c7_robustness_ordering(request):
    start = time.perf_counter()
    wins = {50.0: 0, 90.0: 0}
    ties = {50.0: 0, 90.0: 0}
    for seed in range(10):
        matrix = generate_synthetic(
            SyntheticSpec(n_algorithms=53, n_datasets=39, target_mean_spearman=0.51, seed=seed)
        )
        report = loo_experiment(matrix, grid=[("mta", 50), ("mta", 90)], repeats=10, master_seed=seed)
        for pct in wins:
            ar = report.mean("mta", "AR", pct)
            mta = report.mean("mta", "AR-MTA", pct)
            wins[pct] += mta < ar
            ties[pct] += mta == ar
    elapsed = time.perf_counter() - start
    note(request, f"AR-MTA wins {wins}, exact ties {ties}, {elapsed:.0f} s")
    assert elapsed < 300
    assert wins[50.0] >= 8 and wins[90.0] >= 8


def _openml_path():
    env = os.environ.get(OPENML_ENV)
    if env:
        return Path(env)
    return OPENML_DEFAULT if OPENML_DEFAULT.exists() else None


@pytest.mark.criterion(8, "OpenML export (if supplied): characterize mean/sd/CV within 0.01 of 0.5134/0.2663/51.86%")
def test_c8_openml_characterization(request, tmp_path):
    path = _openml_path()
    if path is None or not path.exists():
        pytest.skip(f"no OpenML meta-dataset export (set {OPENML_ENV})")
    assert main(["characterize", "--matrix", str(path), "--out", str(tmp_path)]) == 0
    import json

    summary = json.loads((tmp_path / "summary.json").read_text())
    note(request, f"mean={summary['mean']:.4f} sd={summary['sd']:.4f} cv={summary['cv']:.2f}%")
    assert abs(summary["mean"] - 0.5134) <= 0.01
    assert abs(summary["sd"] - 0.2663) <= 0.01
    # CV is a percentage; +-0.01 absolute on the fraction is +-1 point
    assert abs(summary["cv"] / 100 - 0.5186) <= 0.01


@pytest.mark.criterion(9, "experiment command is byte-for-byte deterministic")
def test_c9_determinism(request, tmp_path):
    matrix_path = tmp_path / "m.csv"
    save_matrix(generate_synthetic(SyntheticSpec(n_algorithms=20, n_datasets=10, seed=9)), matrix_path)
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["experiment", "--matrix", str(matrix_path), "--seed", "123", "--out", str(out)]) == 0
        outs.append(out)
    names = ["mil_report.csv", "mil_report.json", "curves.csv", "manifest.json"]
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name
    note(request, "identical: " + ", ".join(names))

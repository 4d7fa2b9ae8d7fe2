"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Reports the best wall time per backend for each kernel on a 53x39 synthetic
matrix, plus one reduced leave-one-out experiment.
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from rankbench import evaluation, kernels
from rankbench.aggregation import ranking_weights
from rankbench.meta_data import SyntheticSpec, generate_synthetic
from rankbench.omission import Mode, OmissionSpec, apply_mta
from rankbench.ranking import rank_columns


def _inputs(seed):
    matrix = generate_synthetic(SyntheticSpec(n_algorithms=53, n_datasets=39, noise_scale=1.0, seed=seed))
    degraded = apply_mta(matrix, OmissionSpec(Mode.MTA, 50, seed=seed))
    ranks = rank_columns(degraded.accuracy).T.copy()
    weights = ranking_weights(ranks, matrix.shape[0])
    order = np.argsort(np.nanmean(ranks, axis=0)).astype(np.int64)
    times, losses, _ = kernels.load_backend("python").loss_curve(matrix.accuracy[:, 0], matrix.runtime[:, 0], order)
    return matrix, ranks, weights, order, times, losses


def _cases(mod, matrix, ranks, weights, order, times, losses):
    acc, rt = matrix.accuracy[:, 0].copy(), matrix.runtime[:, 0].copy()
    init = float(np.nanmax(acc))
    return {
        "fold_weighted": lambda: mod.fold_weighted(ranks, weights),
        "loss_curve": lambda: mod.loss_curve(acc, rt, order),
        "interval_mean": lambda: mod.interval_mean(times, losses, init, 10.0, 1e4, True),
    }


def _experiment(mod, matrix):
    # the package calls through the kernels module, so rebinding it reroutes every loop
    names = ("fold_weighted", "loss_curve", "interval_mean")
    saved = {k: getattr(kernels, k) for k in names}
    for k in names:
        setattr(kernels, k, getattr(mod, k))
    try:
        evaluation.loo_experiment(matrix, grid=[("mta", 50)], repeats=2, master_seed=0)
    finally:
        for k, v in saved.items():
            setattr(kernels, k, v)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", help="also write results here")
    args = p.parse_args(argv)

    backends = {"python": kernels.load_backend("python")}
    try:
        backends["cython"] = kernels.load_backend("cython")
    except ImportError:
        print("compiled extension not built; timing the Python backend only", file=sys.stderr)

    matrix, *rest = _inputs(args.seed)
    results = {}
    for name, mod in backends.items():
        row = {}
        for case, fn in _cases(mod, matrix, *rest).items():
            loops, _ = timeit.Timer(fn).autorange()
            row[case] = min(timeit.repeat(fn, number=loops, repeat=args.repeat)) / loops
        row["loo_experiment"] = min(timeit.repeat(lambda: _experiment(mod, matrix), number=1, repeat=max(1, args.repeat // 2)))
        results[name] = row

    cases = list(results["python"])
    print(f"{'kernel':<16}" + "".join(f"{b:>14}" for b in results) + ("     speedup" if "cython" in results else ""))
    for case in cases:
        line = f"{case:<16}" + "".join(f"{results[b][case] * 1e6:>12.1f}us" for b in results)
        if "cython" in results:
            line += f"{results['python'][case] / results['cython'][case]:>11.1f}x"
        print(line)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()

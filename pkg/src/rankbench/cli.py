"""Command-line interface.

Subcommands::

    rankbench generate      synthetic meta-dataset CSV
    rankbench characterize  pairwise Spearman histogram + summary
    rankbench aggregate     AR / AR-MTA aggregate ranking of a meta-dataset
    rankbench simulate      apply an MTD/MTA omission to a meta-dataset
    rankbench experiment    leave-one-out MIL report

Exit status is 0 on success, 2 on invalid input or arguments, 1 otherwise.
Outputs of a failed command are removed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import os
import sys
from collections.abc import Sequence
from pathlib import Path

from . import __version__
from .aggregation import aggregate_baseline_ar, aggregate_incremental
from .evaluation import DEFAULT_PERCENTS, DEFAULT_REPEATS, Method, MILConfig, loo_experiment
from .meta_data import MatrixFormatError, SyntheticSpec, generate_synthetic, load_matrix, save_matrix
from .omission import Mode, OmissionSpec, apply
from .ranking import characterize, rankings_from_matrix

logger = logging.getLogger("rankbench")

SEED_ENV = "RANKBENCH_SEED"


class UsageError(Exception):
    """Bad input; reported on stderr with exit status 2."""


class _Outputs:
    """Tracks files written by a command so they can be removed on failure."""

    def __init__(self) -> None:
        self.paths: list[Path] = []

    def path(self, p: str | Path) -> Path:
        p = Path(p)
        p.parent.mkdir(parents=True, exist_ok=True)
        self.paths.append(p)
        return p

    def cleanup(self) -> None:
        for p in self.paths:
            try:
                p.unlink()
            except FileNotFoundError:
                pass


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_json_safe(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out: _Outputs, target: Path, command: str, inputs: Sequence[str], params: dict) -> None:
    written = [p for p in out.paths if p != target]
    manifest = {
        "command": command,
        "version": __version__,
        "inputs": [{"path": str(p), "sha256": _sha256(Path(p))} for p in inputs],
        "parameters": params,
        "outputs": [{"path": p.name, "sha256": _sha256(p)} for p in written],
    }
    _write_json(out.path(target), manifest)


def _load(path: str):
    if not Path(path).is_file():
        raise UsageError(f"matrix file not found: {path}")
    try:
        return load_matrix(path)
    except MatrixFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def cmd_generate(args, out: _Outputs) -> None:
    try:
        spec = SyntheticSpec(
            n_algorithms=args.n_algorithms,
            n_datasets=args.n_datasets,
            target_mean_spearman=args.target_spearman,
            noise_scale=args.noise_scale,
            runtime_log_range=tuple(args.runtime_log_range),
            seed=_seed(args.seed),
            heterogeneity=args.heterogeneity,
        )
        matrix = generate_synthetic(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    save_matrix(matrix, out.path(args.out))


def cmd_characterize(args, out: _Outputs) -> None:
    matrix = _load(args.matrix)
    try:
        result = characterize(matrix, bin_width=args.bin_width)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out_dir = Path(args.out)
    with open(out.path(out_dir / "histogram.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_low", "bin_high", "count"])
        for lo, hi, c in result.histogram:
            w.writerow([repr(lo), repr(hi), c])
    _write_json(out.path(out_dir / "summary.json"), result.summary())
    _write_manifest(out, out_dir / "manifest.json", "characterize", [args.matrix], {"bin_width": args.bin_width})
    print(f"mean={result.mean:.4f} sd={result.sd:.4f} cv={result.cv_percent:.2f}% pairs={result.n_pairs}")


def cmd_aggregate(args, out: _Outputs) -> None:
    matrix = _load(args.matrix)
    rankings = rankings_from_matrix(matrix)
    if not rankings:
        raise UsageError("matrix has no test results")
    method = Method.parse(args.method)
    agg = aggregate_baseline_ar(rankings) if method is Method.AR else aggregate_incremental(rankings)
    with open(out.path(args.out), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm_id", "rank", "weight"])
        for a in agg.order():
            w.writerow([a, repr(agg[a].rank), repr(agg[a].weight)])


def cmd_simulate(args, out: _Outputs) -> None:
    matrix = _load(args.matrix)
    try:
        spec = OmissionSpec(Mode.parse(args.mode), args.percent, _seed(args.seed))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    save_matrix(apply(matrix, spec), out.path(args.out))


def cmd_experiment(args, out: _Outputs) -> None:
    matrix = _load(args.matrix)
    try:
        modes = [Mode.parse(m) for m in args.mode]
        methods = [Method.parse(m) for m in args.method]
        grid = [OmissionSpec(m, p) for m in modes for p in args.percents]
        cfg = MILConfig(args.tmin, args.tmax, args.time_scale)
        if args.repeats < 1:
            raise ValueError("--repeats must be positive")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    seed = _seed(args.seed)
    report = loo_experiment(matrix, methods, grid, args.repeats, cfg, seed, workers=args.workers)
    out_dir = Path(args.out)
    report.to_csv(out.path(out_dir / "mil_report.csv"))
    report.to_json(out.path(out_dir / "mil_report.json"))
    report.curves_to_csv(out.path(out_dir / "curves.csv"))
    params = dict(report.config)
    _write_manifest(out, out_dir / "manifest.json", "experiment", [args.matrix], params)
    for (mode, method, pct), cell in report.cells.items():
        print(f"{mode:<4} {method:<7} {pct:>5g}%  MIL={cell.mean_mil:.6f}  folds={cell.n_folds}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankbench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic meta-dataset")
    p.add_argument("--n-algorithms", type=int, default=53)
    p.add_argument("--n-datasets", type=int, default=39)
    p.add_argument("--target-spearman", type=float, default=0.5134)
    p.add_argument("--noise-scale", type=float, default=None, help="skip calibration and use this noise level")
    p.add_argument("--heterogeneity", type=float, default=1.3)
    p.add_argument("--runtime-log-range", type=float, nargs=2, default=(-1.0, 3.0), metavar=("LO", "HI"))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("characterize", help="pairwise Spearman histogram and summary")
    p.add_argument("--matrix", required=True)
    p.add_argument("--bin-width", type=float, default=0.1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("aggregate", help="aggregate per-dataset rankings")
    p.add_argument("--matrix", required=True)
    p.add_argument("--method", choices=["ar", "ar-mta"], default="ar-mta")
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("simulate", help="apply an omission to a meta-dataset")
    p.add_argument("--matrix", required=True)
    p.add_argument("--mode", choices=["mtd", "mta"], required=True)
    p.add_argument("--percent", type=float, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="leave-one-out MIL experiment")
    p.add_argument("--matrix", required=True)
    p.add_argument("--mode", type=_str_list, default=["mtd", "mta"], help="comma list of mtd,mta")
    p.add_argument("--method", type=_str_list, default=["ar", "ar-mta"], help="comma list of ar,ar-mta")
    p.add_argument("--percents", type=_float_list, default=list(DEFAULT_PERCENTS))
    p.add_argument("--repeats", type=int, default=DEFAULT_REPEATS)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tmin", type=float, default=10.0)
    p.add_argument("--tmax", type=float, default=1e4)
    p.add_argument("--time-scale", choices=["linear", "log"], default="linear")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    out = _Outputs()
    try:
        args.func(args, out)
    except UsageError as exc:
        out.cleanup()
        print(f"rankbench {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        out.cleanup()
        print(f"rankbench {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

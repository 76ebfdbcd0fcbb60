"""Command-line front end: fit user data, run benchmark campaigns, and
export benchmark truth vectors as plot-ready CSV files."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .benchmarks import (
    BENCHMARK_NAMES,
    default_grid,
    evaluate_benchmark,
    normalize_snr,
)
from .knotmap import KnotMapOptions
from .model_search import FitConfig, adaptive_fit
from .pso import SwarmConfig
from .simulate import (
    CampaignSpec,
    config_from_label,
    format_label,
    label_options_for,
    parse_label,
    run_campaign,
    spec_from_dict,
    summary_to_dict,
    write_records_csv,
)


class CliError(Exception):
    """User-facing error with a one-line message."""


_OPTION_FLAGS = ("map_kind", "lam", "iters", "end_knots", "end_bsplines", "adjust")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmspline",
        description="Adaptive spline fitting with swarm-optimized knot placement.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_label=True):
        if with_label:
            p.add_argument("--label", help="key string such as LP_100_0.1_100_FKM")
            p.add_argument("--map", dest="map_kind", choices=["plain", "centered"])
            p.add_argument("--lambda", dest="lam", type=float)
            p.add_argument("--iters", dest="iters", type=int)
            p.add_argument("--end-knots", dest="end_knots", choices=["fixed", "variable"])
            p.add_argument("--end-bsplines", dest="end_bsplines", choices=["keep", "drop"])
            p.add_argument("--adjust", dest="adjust", choices=["merge", "heal"])
        p.add_argument("--models", help="comma-separated knot counts, e.g. 5,6,7")
        p.add_argument("--runs", type=int, help="independent swarm runs per model")
        p.add_argument("--no-bias-correction", action="store_true")
        p.add_argument("--jobs", type=int, help="worker process count")

    p_fit = sub.add_parser("fit", help="fit a two-column (x, y) CSV file")
    p_fit.add_argument("--in", dest="input", required=True, help="input CSV path")
    p_fit.add_argument("--out", dest="outdir", required=True, help="output directory")
    add_common(p_fit)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo benchmark campaign")
    p_sim.add_argument("--benchmark", choices=list(BENCHMARK_NAMES))
    p_sim.add_argument("--snr", type=float)
    p_sim.add_argument(
        "--n", "--nr", dest="n_realizations", type=int, default=100,
        help="number of data realizations (default 100)",
    )
    p_sim.add_argument("--spec", help="campaign spec as a JSON file")
    p_sim.add_argument("--out", dest="outdir", required=True, help="output directory")
    p_sim.add_argument("--seed", dest="base_seed", type=int, default=0,
                       help="base seed; realization j uses base+j")
    add_common(p_sim)

    p_bench = sub.add_parser("benchmarks", help="list or dump benchmark functions")
    p_bench.add_argument("--list", action="store_true", help="list benchmark names")
    p_bench.add_argument("--dump", metavar="NAME", help="write (x, f(x)) samples as CSV")
    p_bench.add_argument("--points", type=int, default=256)
    p_bench.add_argument("--snr", type=float, help="normalize the dumped signal to this SNR")
    p_bench.add_argument("--out", help="output CSV path (default: stdout)")
    return parser


def _config_from_args(args) -> FitConfig:
    overrides = {}
    if args.models:
        try:
            model_set = tuple(int(tok) for tok in args.models.split(","))
        except ValueError:
            raise CliError(f"--models {args.models!r} is not a comma-separated integer list")
        overrides["model_set"] = model_set
    if args.runs is not None:
        overrides["num_runs"] = args.runs
    if args.no_bias_correction:
        overrides["bias_correction"] = False

    explicit = [name for name in _OPTION_FLAGS if getattr(args, name) is not None]
    if args.label is not None:
        if explicit:
            raise CliError(
                f"--label is mutually exclusive with explicit option flags ({explicit})"
            )
        return config_from_label(args.label, **overrides)
    base = FitConfig(**overrides)
    return FitConfig(
        lam=args.lam if args.lam is not None else base.lam,
        model_set=base.model_set,
        num_runs=base.num_runs,
        swarm=SwarmConfig(
            bounds=base.swarm.bounds,
            num_iterations=args.iters if args.iters is not None else 100,
        ),
        knot_options=KnotMapOptions(
            map_kind=args.map_kind or "plain",
            end_knots=args.end_knots or "fixed",
            adjust=args.adjust or "merge",
        ),
        end_bsplines=args.end_bsplines or "keep",
        bias_correction=base.bias_correction,
    )


def _read_xy(path: Path) -> tuple[np.ndarray, np.ndarray]:
    rows = []
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or not "".join(row).strip():
                    continue
                try:
                    x, y = float(row[0]), float(row[1])
                except (ValueError, IndexError):
                    if lineno == 1:
                        continue  # header line
                    raise CliError(f"{path}: line {lineno} is not a numeric (x, y) pair")
                rows.append((x, y))
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}")
    if len(rows) < 2:
        raise CliError(f"{path}: need at least two (x, y) rows")
    data = np.array(rows)
    order = np.argsort(data[:, 0], kind="stable")
    data = data[order]
    if np.any(np.diff(data[:, 0]) <= 0):
        raise CliError(f"{path}: x values must be distinct")
    return data[:, 0], data[:, 1]


def _write_outputs(writers: list[tuple[Path, callable]]) -> None:
    """Run each (path, writer) pair; on failure remove everything written."""
    written = []
    try:
        for path, writer in writers:
            writer(path)
            written.append(path)
    except BaseException:
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        raise


def _cmd_fit(args) -> int:
    config = _config_from_args(args)
    x, y = _read_xy(Path(args.input))
    x_min, x_max = float(x[0]), float(x[-1])
    grid = (x - x_min) / (x_max - x_min)
    grid[0], grid[-1] = 0.0, 1.0
    result = adaptive_fit(y, grid, config)
    winner = next(m for m in result.models if m.num_knots == result.m_best)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    model = {
        "m_best": result.m_best,
        "fitness": result.fitness,
        "aic_table": {str(m): a for m, a in sorted(result.aic_table.items())},
        "knots": winner.knots.values.tolist(),
        "order": winner.knots.order,
        "coefficients": winner.coefficients.tolist(),
        "scale": result.scale,
        "best_run": winner.best_run,
        "x_transform": {"min": x_min, "max": x_max},
        "label": format_label(
            label_options_for(config, parse_label(args.label).snr if args.label else 1.0)
        ),
        "failed_models": result.failed_models,
        "versions": {"swarmspline": __version__, "numpy": np.__version__},
    }

    def write_json(path):
        with open(path, "w") as fh:
            json.dump(model, fh, indent=2)
            fh.write("\n")

    def write_csv(path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "estimate"])
            for xi, fi in zip(x, result.estimate):
                writer.writerow([repr(float(xi)), repr(float(fi))])

    _write_outputs(
        [(outdir / "model.json", write_json), (outdir / "estimate.csv", write_csv)]
    )
    print(f"wrote {outdir / 'model.json'} and {outdir / 'estimate.csv'}")
    return 0


def _cmd_simulate(args) -> int:
    if args.spec is not None:
        conflicting = [
            name for name in ("benchmark", "label", "snr") if getattr(args, name)
        ]
        if conflicting:
            raise CliError(f"--spec is mutually exclusive with {conflicting}")
        try:
            with open(args.spec) as fh:
                spec = spec_from_dict(json.load(fh))
        except OSError as exc:
            raise CliError(f"cannot read {args.spec}: {exc.strerror or exc}")
        except (json.JSONDecodeError, KeyError) as exc:
            raise CliError(f"{args.spec}: invalid campaign spec ({exc})")
    else:
        if args.benchmark is None:
            raise CliError("simulate needs --benchmark (or --spec)")
        config = _config_from_args(args)
        if args.label is not None:
            snr = parse_label(args.label).snr
            if args.snr is not None and args.snr != snr:
                raise CliError(
                    f"--snr {args.snr} conflicts with label SNR {snr}"
                )
        elif args.snr is not None:
            snr = args.snr
        else:
            raise CliError("simulate needs --snr or a --label that encodes it")
        spec = CampaignSpec(
            benchmark=args.benchmark,
            snr=snr,
            n_realizations=args.n_realizations,
            config=config,
            label=args.label,
            base_seed=args.base_seed,
        )
    summary = run_campaign(spec, jobs=args.jobs)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    def write_json(path):
        with open(path, "w") as fh:
            json.dump(summary_to_dict(summary), fh, indent=2)
            fh.write("\n")

    _write_outputs(
        [
            (outdir / "summary.json", write_json),
            (outdir / "records.csv", lambda p: write_records_csv(summary, p)),
        ]
    )
    print(
        f"{spec.benchmark} snr={spec.snr:g} n={spec.n_realizations}: "
        f"rmse={summary.rmse:.4g} +/- {summary.rmse_error:.2g}, "
        f"mean knots={summary.mean_knots:.2f}"
    )
    return 0


def _cmd_benchmarks(args) -> int:
    if args.list or not args.dump:
        for name in BENCHMARK_NAMES:
            print(name)
        return 0
    if args.dump not in BENCHMARK_NAMES:
        raise CliError(f"unknown benchmark {args.dump!r}")
    if args.points < 2:
        raise CliError("--points must be at least 2")
    grid = default_grid(args.points)
    values = evaluate_benchmark(args.dump, grid)
    if args.snr is not None:
        values = normalize_snr(values, args.snr)

    def emit(fh):
        writer = csv.writer(fh)
        writer.writerow(["x", args.dump])
        for xi, fi in zip(grid, values):
            writer.writerow([repr(float(xi)), repr(float(fi))])

    if args.out:
        path = Path(args.out)

        def write(p):
            with open(p, "w", newline="") as fh:
                emit(fh)

        _write_outputs([(path, write)])
    else:
        emit(sys.stdout)
    return 0


def run_cli(argv) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "fit": _cmd_fit,
        "simulate": _cmd_simulate,
        "benchmarks": _cmd_benchmarks,
    }
    try:
        return handlers[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return run_cli(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())

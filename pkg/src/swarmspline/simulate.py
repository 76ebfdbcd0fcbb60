"""Monte Carlo campaign runner and test-case labeling.

A campaign applies the adaptive fit to many independent noisy realizations
of one benchmark at one SNR, then reports the sample root mean squared
error with a bootstrap error bar, knot-count statistics, and pointwise
summaries of the estimates.

Test cases are labeled with compact strings like ``LP_100_0.1_50_FKM``:
optimizer variant and knot map, then SNR, penalty gain and iteration
count, then end-knot handling, end-B-spline retention, and the
merge-or-heal switch.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .benchmarks import BENCHMARK_NAMES, generate_realization
from .knotmap import KnotMapOptions
from .model_search import FitConfig, SplineFitResult, adaptive_fit
from .pso import SwarmConfig

# Seed namespace for bootstrap resampling, disjoint from noise and swarm
# streams.
_BOOTSTRAP_STREAM = 313131
DEFAULT_BOOTSTRAP_SEED = 1
DEFAULT_BOOTSTRAP_RESAMPLES = 10_000


class LabelError(ValueError):
    """Malformed campaign label string."""


_MAP_LETTERS = {"P": "plain", "C": "centered"}
_END_LETTERS = {"F": "fixed", "V": "variable"}
_BSPL_LETTERS = {"K": "keep", "D": "drop"}
_ADJUST_LETTERS = {"M": "merge", "H": "heal"}


@dataclass(frozen=True)
class LabelOptions:
    map_kind: str
    snr: float
    lam: float
    num_iterations: int
    end_knots: str
    end_bsplines: str
    adjust: str


def parse_label(label: str) -> LabelOptions:
    """Decode a key string of the form ``LP_100_0.1_50_FKM``."""
    parts = label.split("_")
    if len(parts) != 5:
        raise LabelError(
            f"label {label!r} must have 5 underscore-separated fields, got {len(parts)}"
        )
    head, snr_s, lam_s, iters_s, tail = parts
    if len(head) != 2 or head[0] != "L" or head[1] not in _MAP_LETTERS:
        raise LabelError(
            f"label {label!r}: optimizer/map field {head!r} must be 'L' plus one of "
            f"{sorted(_MAP_LETTERS)}"
        )
    try:
        snr = float(snr_s)
    except ValueError:
        raise LabelError(f"label {label!r}: SNR field {snr_s!r} is not a number") from None
    if snr <= 0:
        raise LabelError(f"label {label!r}: SNR must be positive")
    try:
        lam = float(lam_s)
    except ValueError:
        raise LabelError(
            f"label {label!r}: penalty field {lam_s!r} is not a number"
        ) from None
    if lam < 0:
        raise LabelError(f"label {label!r}: penalty gain must be nonnegative")
    try:
        iters = int(iters_s)
    except ValueError:
        raise LabelError(
            f"label {label!r}: iteration field {iters_s!r} is not an integer"
        ) from None
    if iters < 1:
        raise LabelError(f"label {label!r}: iteration count must be positive")
    if len(tail) != 3:
        raise LabelError(f"label {label!r}: option field {tail!r} must have 3 letters")
    for letter, table, what in (
        (tail[0], _END_LETTERS, "end-knot"),
        (tail[1], _BSPL_LETTERS, "end-B-spline"),
        (tail[2], _ADJUST_LETTERS, "merge/heal"),
    ):
        if letter not in table:
            raise LabelError(
                f"label {label!r}: {what} letter {letter!r} must be one of {sorted(table)}"
            )
    return LabelOptions(
        map_kind=_MAP_LETTERS[head[1]],
        snr=snr,
        lam=lam,
        num_iterations=iters,
        end_knots=_END_LETTERS[tail[0]],
        end_bsplines=_BSPL_LETTERS[tail[1]],
        adjust=_ADJUST_LETTERS[tail[2]],
    )


def _format_number(value: float) -> str:
    if float(value) == int(value):
        return str(int(value))
    return repr(float(value))


def format_label(options: LabelOptions) -> str:
    rev_map = {v: k for k, v in _MAP_LETTERS.items()}
    rev_end = {v: k for k, v in _END_LETTERS.items()}
    rev_bspl = {v: k for k, v in _BSPL_LETTERS.items()}
    rev_adj = {v: k for k, v in _ADJUST_LETTERS.items()}
    return "_".join(
        [
            "L" + rev_map[options.map_kind],
            _format_number(options.snr),
            _format_number(options.lam),
            str(options.num_iterations),
            rev_end[options.end_knots] + rev_bspl[options.end_bsplines] + rev_adj[options.adjust],
        ]
    )


def config_from_label(label: str | LabelOptions, **overrides) -> FitConfig:
    """Build a fit configuration from a label; keyword overrides reach the
    non-label settings (model_set, num_runs, bias_correction, ...)."""
    opts = parse_label(label) if isinstance(label, str) else label
    base = FitConfig(**overrides) if overrides else FitConfig()
    return replace(
        base,
        lam=opts.lam,
        swarm=replace(base.swarm, num_iterations=opts.num_iterations),
        knot_options=KnotMapOptions(
            map_kind=opts.map_kind,
            end_knots=opts.end_knots,
            adjust=opts.adjust,
            order=base.knot_options.order,
        ),
        end_bsplines=opts.end_bsplines,
    )


def label_options_for(config: FitConfig, snr: float) -> LabelOptions:
    return LabelOptions(
        map_kind=config.knot_options.map_kind,
        snr=snr,
        lam=config.lam,
        num_iterations=config.swarm.num_iterations,
        end_knots=config.knot_options.end_knots,
        end_bsplines=config.end_bsplines,
        adjust=config.knot_options.adjust,
    )


@dataclass(frozen=True)
class CampaignSpec:
    benchmark: str
    snr: float
    n_realizations: int
    config: FitConfig
    label: str | None = None
    base_seed: int = 0
    bootstrap_resamples: int = DEFAULT_BOOTSTRAP_RESAMPLES
    bootstrap_seed: int = DEFAULT_BOOTSTRAP_SEED

    def __post_init__(self):
        if self.benchmark not in BENCHMARK_NAMES:
            raise ValueError(f"unknown benchmark {self.benchmark!r}")
        if self.snr <= 0:
            raise ValueError("snr must be positive")
        if self.n_realizations < 1:
            raise ValueError("need at least one realization")
        if self.label is not None:
            parsed = parse_label(self.label)
            stated = label_options_for(self.config, self.snr)
            if parsed != stated:
                raise ValueError(
                    f"label {self.label!r} decodes to {parsed}, but the campaign "
                    f"config corresponds to {stated}"
                )

    @classmethod
    def from_label(
        cls,
        benchmark: str,
        label: str,
        n_realizations: int,
        *,
        snr: float | None = None,
        base_seed: int = 0,
        **config_overrides,
    ) -> "CampaignSpec":
        opts = parse_label(label)
        if snr is not None and snr != opts.snr:
            raise ValueError(
                f"label {label!r} encodes SNR {opts.snr}, got --snr {snr}"
            )
        return cls(
            benchmark=benchmark,
            snr=opts.snr,
            n_realizations=n_realizations,
            config=config_from_label(opts, **config_overrides),
            label=label,
            base_seed=base_seed,
        )


@dataclass(frozen=True)
class RealizationRecord:
    index: int
    seed: int
    m_best: int
    fitness: float
    squared_error: float
    squared_error_uncorrected: float


@dataclass(frozen=True)
class CampaignSummary:
    spec: CampaignSpec
    rmse: float
    rmse_error: float
    rmse_uncorrected: float
    rmse_uncorrected_error: float
    mean_knots: float
    knots_std: float
    grid: np.ndarray
    truth: np.ndarray
    pointwise_mean: np.ndarray
    pointwise_std: np.ndarray
    records: tuple[RealizationRecord, ...] = field(repr=False)


def rmse(squared_errors) -> float:
    """Square root of the mean squared error."""
    arr = np.asarray(squared_errors, dtype=float)
    if arr.size == 0:
        raise ValueError("need at least one squared error")
    if np.any(arr < 0):
        raise ValueError("squared errors must be nonnegative")
    return float(np.sqrt(arr.mean()))


def bootstrap_error(
    squared_errors,
    resamples: int = DEFAULT_BOOTSTRAP_RESAMPLES,
    seed: int = DEFAULT_BOOTSTRAP_SEED,
) -> float:
    """Sampling error of the RMSE: standard deviation over resamples drawn
    with replacement."""
    arr = np.asarray(squared_errors, dtype=float)
    if arr.size == 0:
        raise ValueError("need at least one squared error")
    rng = np.random.default_rng((_BOOTSTRAP_STREAM, seed))
    stats = np.empty(resamples)
    chunk = max(1, min(resamples, 2_000_000 // max(arr.size, 1)))
    done = 0
    while done < resamples:
        m = min(chunk, resamples - done)
        idx = rng.integers(0, arr.size, size=(m, arr.size))
        stats[done : done + m] = np.sqrt(arr[idx].mean(axis=1))
        done += m
    return float(stats.std(ddof=1))


def _run_one(args) -> tuple[int, int, float, float, float, np.ndarray]:
    spec, j = args
    data = generate_realization(spec.benchmark, spec.snr, seed=spec.base_seed + j)
    fit: SplineFitResult = adaptive_fit(data.y, data.grid, spec.config)
    err = data.truth - fit.estimate
    err_raw = data.truth - fit.raw_estimate
    return (
        j,
        fit.m_best,
        fit.fitness,
        float(err @ err),
        float(err_raw @ err_raw),
        fit.estimate,
    )


def _summarize(spec: CampaignSpec, rows, grid, truth) -> CampaignSummary:
    rows = sorted(rows, key=lambda r: r[0])
    records = tuple(
        RealizationRecord(
            index=j,
            seed=spec.base_seed + j,
            m_best=m_best,
            fitness=fitness,
            squared_error=sq,
            squared_error_uncorrected=sq_raw,
        )
        for j, m_best, fitness, sq, sq_raw, _ in rows
    )
    estimates = np.array([est for *_, est in rows])
    sq = np.array([r.squared_error for r in records])
    sq_raw = np.array([r.squared_error_uncorrected for r in records])
    knots = np.array([r.m_best for r in records], dtype=float)
    ddof = 1 if len(records) > 1 else 0
    return CampaignSummary(
        spec=spec,
        rmse=rmse(sq),
        rmse_error=bootstrap_error(sq, spec.bootstrap_resamples, spec.bootstrap_seed),
        rmse_uncorrected=rmse(sq_raw),
        rmse_uncorrected_error=bootstrap_error(
            sq_raw, spec.bootstrap_resamples, spec.bootstrap_seed
        ),
        mean_knots=float(knots.mean()),
        knots_std=float(knots.std(ddof=ddof)),
        grid=grid,
        truth=truth,
        pointwise_mean=estimates.mean(axis=0),
        pointwise_std=estimates.std(axis=0, ddof=ddof),
        records=records,
    )


def run_campaign(spec: CampaignSpec, jobs: int | None = None) -> CampaignSummary:
    """Fit every realization and aggregate the metrics.

    Realizations are independent and run on a process pool; realization
    ``j`` draws its noise from a stream seeded by ``base_seed + j``, so the
    outcome does not depend on the worker count.  Any failed realization
    aborts the campaign: silently dropping it would bias the error.
    """
    data0 = generate_realization(spec.benchmark, spec.snr, seed=spec.base_seed + 1)
    tasks = [(spec, j) for j in range(1, spec.n_realizations + 1)]
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs > 1 and spec.n_realizations > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_one, tasks, chunksize=1))
    else:
        rows = [_run_one(t) for t in tasks]
    return _summarize(spec, rows, data0.grid, data0.truth)


def spec_from_dict(blob: dict) -> CampaignSpec:
    """Rebuild a campaign spec from its JSON form (inverse of
    :func:`spec_to_dict`)."""
    cfg = blob.get("config", {})
    swarm = SwarmConfig(
        bounds=((0.0, 1.0),),
        num_iterations=int(cfg.get("num_iterations", 100)),
        num_particles=int(cfg.get("num_particles", 40)),
    )
    config = FitConfig(
        lam=float(cfg.get("lam", 0.1)),
        model_set=tuple(cfg.get("model_set", FitConfig().model_set)),
        num_runs=int(cfg.get("num_runs", 4)),
        swarm=swarm,
        knot_options=KnotMapOptions(
            map_kind=cfg.get("map_kind", "plain"),
            end_knots=cfg.get("end_knots", "fixed"),
            adjust=cfg.get("adjust", "merge"),
            order=int(cfg.get("order", 4)),
        ),
        end_bsplines=cfg.get("end_bsplines", "keep"),
        bias_correction=bool(cfg.get("bias_correction", True)),
    )
    return CampaignSpec(
        benchmark=blob["benchmark"],
        snr=float(blob["snr"]),
        n_realizations=int(blob["n_realizations"]),
        config=config,
        label=blob.get("label"),
        base_seed=int(blob.get("base_seed", 0)),
        bootstrap_resamples=int(
            blob.get("bootstrap_resamples", DEFAULT_BOOTSTRAP_RESAMPLES)
        ),
        bootstrap_seed=int(blob.get("bootstrap_seed", DEFAULT_BOOTSTRAP_SEED)),
    )


def spec_to_dict(spec: CampaignSpec) -> dict:
    cfg = spec.config
    return {
        "benchmark": spec.benchmark,
        "snr": spec.snr,
        "n_realizations": spec.n_realizations,
        "label": spec.label or format_label(label_options_for(cfg, spec.snr)),
        "base_seed": spec.base_seed,
        "bootstrap_resamples": spec.bootstrap_resamples,
        "bootstrap_seed": spec.bootstrap_seed,
        "config": {
            "lam": cfg.lam,
            "model_set": list(cfg.model_set),
            "num_runs": cfg.num_runs,
            "num_particles": cfg.swarm.num_particles,
            "num_iterations": cfg.swarm.num_iterations,
            "map_kind": cfg.knot_options.map_kind,
            "end_knots": cfg.knot_options.end_knots,
            "adjust": cfg.knot_options.adjust,
            "order": cfg.knot_options.order,
            "end_bsplines": cfg.end_bsplines,
            "bias_correction": cfg.bias_correction,
        },
    }


def summary_to_dict(summary: CampaignSummary) -> dict:
    """JSON-ready view of a campaign summary (records go to CSV)."""
    import numpy as _np

    from . import __version__

    return {
        "spec": spec_to_dict(summary.spec),
        "rmse": summary.rmse,
        "rmse_error": summary.rmse_error,
        "rmse_uncorrected": summary.rmse_uncorrected,
        "rmse_uncorrected_error": summary.rmse_uncorrected_error,
        "mean_knots": summary.mean_knots,
        "knots_std": summary.knots_std,
        "grid": summary.grid.tolist(),
        "truth": summary.truth.tolist(),
        "pointwise_mean": summary.pointwise_mean.tolist(),
        "pointwise_std": summary.pointwise_std.tolist(),
        "versions": {"swarmspline": __version__, "numpy": _np.__version__},
    }


RECORD_FIELDS = (
    "index",
    "seed",
    "m_best",
    "fitness",
    "squared_error",
    "squared_error_uncorrected",
)


def write_records_csv(summary: CampaignSummary, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_FIELDS)
        for rec in summary.records:
            writer.writerow(
                [
                    rec.index,
                    rec.seed,
                    rec.m_best,
                    repr(rec.fitness),
                    repr(rec.squared_error),
                    repr(rec.squared_error_uncorrected),
                ]
            )

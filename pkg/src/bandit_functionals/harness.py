"""Experiment orchestration: epsilon sweeps, slope fits and report files."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .environment import BanditEnv
from .errors import ConfigError, TooFewPoints
from .model import (AssumptionParams, BetaTail, Dirac, Distribution, FunctionalSpec, Gaussian,
                    PerturbedUniform, Uniform, check_assumptions)
from .offline import MODES as SCHEDULE_MODES
from .offline import EstimateReport, offline_schedule, run_offline
from .online import run_online

CSV_HEADER = ("eps", "mode", "functional", "trial", "estimate", "truth", "abs_err",
              "samples_total", "n", "m", "seed")
RUN_MODES = ("offline", "online")


# ---------------------------------------------------------------------------
# text specs


def _numbers(text: str, field_name: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(field_name, f"expected comma-separated numbers, got {text!r}") from None


def parse_distribution(text: str) -> Distribution:
    """``uniform:lo,hi``, ``dirac:at``, ``gaussian:mu,sd``, ``beta_tail:beta`` or
    ``perturbed_uniform:k,bump_eps,shift,scale[,lo,hi]``."""
    name, _, args = text.strip().partition(":")
    vals = _numbers(args, "distribution")
    try:
        if name == "uniform":
            return Uniform(*(vals or [0.0, 1.0]))
        if name == "dirac":
            return Dirac(*(vals or [0.5]))
        if name == "gaussian":
            return Gaussian(*(vals or [0.0, 1.0]))
        if name == "beta_tail":
            return BetaTail(*(vals or [2.0]))
        if name == "perturbed_uniform":
            from .lowerbound.bump import BumpSpec

            k, bump_eps, *rest = vals
            return PerturbedUniform(BumpSpec(int(k), bump_eps), *rest)
    except (TypeError, ValueError) as exc:
        raise ConfigError("distribution", str(exc)) from None
    raise ConfigError("distribution", f"unknown family {name!r}")


def parse_functional(text: str) -> FunctionalSpec:
    """``mean``, ``median``, ``quantile:alpha``, ``maximum`` or ``trimmed:alpha``."""
    name, _, args = text.strip().partition(":")
    try:
        if name == "mean":
            return FunctionalSpec.mean()
        if name == "median":
            return FunctionalSpec.median()
        if name in ("maximum", "max"):
            return FunctionalSpec.maximum()
        if name in ("quantile", "trimmed"):
            (alpha,) = _numbers(args, "functional")
            return FunctionalSpec(name, alpha)
    except ValueError as exc:
        raise ConfigError("functional", str(exc)) from None
    raise ConfigError("functional", f"unknown functional {text!r}")


# ---------------------------------------------------------------------------
# configuration


@dataclass
class SweepConfig:
    functional: str = "median"
    distribution: str = "uniform:0,1"
    eps_grid: tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    delta: float = 0.1
    trials: int = 50
    modes: tuple[str, ...] = RUN_MODES
    schedule_mode: str = "unit_constant"
    seed: int = 0
    output_path: str = "sweep.csv"
    workers: int = 1

    def validate(self) -> None:
        """Raise :class:`ConfigError` naming the first invalid field."""
        parse_functional(self.functional)
        parse_distribution(self.distribution)
        eps = list(self.eps_grid)
        if not eps or any(not (e > 0 and math.isfinite(e)) for e in eps):
            raise ConfigError("eps_grid", "needs positive finite values")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("eps_grid", "must be strictly decreasing")
        if not 0 < self.delta < 1:
            raise ConfigError("delta", "must lie in (0, 1)")
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        if not self.modes or any(m not in RUN_MODES for m in self.modes):
            raise ConfigError("modes", f"must be a nonempty subset of {RUN_MODES}")
        if self.schedule_mode not in SCHEDULE_MODES:
            raise ConfigError("schedule_mode", f"must be one of {SCHEDULE_MODES}")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")

    @classmethod
    def from_mapping(cls, values: dict) -> SweepConfig:
        """Build from string or typed values keyed by field name."""
        kwargs = {}
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        for key, raw in values.items():
            if key not in types:
                raise ConfigError(key, "unknown configuration key")
            kwargs[key] = _coerce(key, raw)
        return cls(**kwargs)


def _coerce(key, raw):
    if not isinstance(raw, str):
        if key in ("eps_grid", "modes"):
            return tuple(raw)
        return raw
    raw = raw.strip()
    try:
        if key == "eps_grid":
            return tuple(_numbers(raw, key))
        if key == "modes":
            return tuple(v.strip() for v in raw.split(",") if v.strip())
        if key in ("trials", "seed", "workers"):
            return int(raw)
        if key == "delta":
            return float(raw)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r}") from None
    return raw


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment; lists are comma-separated."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        if not sep:
            raise ConfigError(f"line {lineno}", "expected key = value")
        values[key.strip()] = value.strip()
    return values


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepRow:
    eps: float
    mode: str
    functional: str
    trial: int
    estimate: float
    truth: float
    abs_err: float
    samples_total: int
    n: int
    m: int
    seed: int

    def as_csv(self) -> list[str]:
        return [repr(self.eps), self.mode, self.functional, str(self.trial), repr(self.estimate),
                repr(self.truth), repr(self.abs_err), str(self.samples_total), str(self.n),
                str(self.m), str(self.seed)]


@dataclass
class SweepReport:
    config: SweepConfig
    rows: list[SweepRow] = field(default_factory=list)
    slopes: dict[str, tuple[float, float, float] | None] = field(default_factory=dict)
    failure_rates: dict[tuple[float, str], float] = field(default_factory=dict)
    median_samples: dict[tuple[float, str], float] = field(default_factory=dict)


def trial_seed(base_seed: int, eps_index: int, mode: str, trial: int) -> int:
    """Independent 64-bit seed for one (eps, mode, trial) cell entry."""
    words = np.random.SeedSequence([int(base_seed) & 0xFFFFFFFF, int(base_seed) >> 32, eps_index,
                                    RUN_MODES.index(mode), trial]).generate_state(2, np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


def run_single(dist: Distribution, fn: FunctionalSpec, eps: float, delta: float,
               params: AssumptionParams, mode: str, schedule_mode: str, seed: int,
               noise_sd: float = 1.0) -> EstimateReport:
    env = BanditEnv(dist, noise_sd, seed)
    if mode == "offline":
        return run_offline(env, fn, offline_schedule(fn, eps, delta, params, schedule_mode))
    return run_online(env, fn, eps, delta, params, schedule_mode)


def _trial_job(job):
    (dist_text, fn_text, eps, eps_index, delta, params, mode, schedule_mode, base_seed, trial) = job
    fn = parse_functional(fn_text)
    seed = trial_seed(base_seed, eps_index, mode, trial)
    rep = run_single(parse_distribution(dist_text), fn, eps, delta, params, mode, schedule_mode, seed)
    return SweepRow(eps=eps, mode=mode, functional=fn.label, trial=trial, estimate=rep.estimate,
                    truth=rep.truth, abs_err=rep.abs_err, samples_total=rep.M,
                    n=rep.schedule.n, m=rep.schedule.m, seed=seed)


def run_sweep(cfg: SweepConfig) -> SweepReport:
    """Run every (eps, mode, trial) cell and summarize budgets and failures."""
    cfg.validate()
    dist = parse_distribution(cfg.distribution)
    fn = parse_functional(cfg.functional)
    jobs = []
    for i, eps in enumerate(cfg.eps_grid):
        params = check_assumptions(dist, fn, eps)
        if not params.ok:
            raise ConfigError("distribution", "assumption check failed: " + "; ".join(params.violations))
        for mode in cfg.modes:
            for trial in range(cfg.trials):
                jobs.append((cfg.distribution, cfg.functional, float(eps), i, cfg.delta, params,
                             mode, cfg.schedule_mode, cfg.seed, trial))
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(_trial_job, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))
    else:
        rows = [_trial_job(job) for job in jobs]
    order = {m: j for j, m in enumerate(RUN_MODES)}
    rows.sort(key=lambda r: (-r.eps, order[r.mode], r.trial))

    report = SweepReport(config=cfg, rows=rows)
    for mode in cfg.modes:
        points = []
        for eps in cfg.eps_grid:
            cell = [r for r in rows if r.mode == mode and r.eps == eps]
            med = float(np.median([r.samples_total for r in cell]))
            report.median_samples[(eps, mode)] = med
            report.failure_rates[(eps, mode)] = sum(r.abs_err > eps for r in cell) / len(cell)
            points.append((1.0 / eps, med))
        report.slopes[mode] = fit_slope(points) if len(points) >= 3 else None
    return report


def fit_slope(points) -> tuple[float, float, float]:
    """Least-squares line through ``(ln x, ln y)``; returns (slope, intercept, r2)."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise TooFewPoints("need at least 3 points")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("coordinates must be positive")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    # exact zero for flat data instead of polyfit's ~1e-17 noise
    if ss_tot == 0:
        slope = 0.0
    return float(slope), float(intercept), float(r2)


# ---------------------------------------------------------------------------
# reports


def write_rows(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.as_csv())


def report_summary(report: SweepReport) -> dict:
    cfg = dataclasses.asdict(report.config)
    cfg["eps_grid"] = list(cfg["eps_grid"])
    cfg["modes"] = list(cfg["modes"])
    slopes = {mode: (None if fit is None else {"slope": fit[0], "intercept": fit[1], "r2": fit[2]})
              for mode, fit in report.slopes.items()}
    by_mode = lambda table: {mode: {repr(eps): v for (eps, m), v in table.items() if m == mode}
                             for mode in sorted({m for _, m in table})}
    return {"config": cfg, "slopes": slopes, "failure_rates": by_mode(report.failure_rates),
            "median_samples": by_mode(report.median_samples)}


def emit_report(report: SweepReport, path) -> Path:
    """Write the CSV at ``path`` and a JSON summary next to it; returns the JSON path."""
    path = Path(path)
    write_rows(report.rows, path)
    json_path = path.with_suffix(".json")
    json_path.write_text(json.dumps(report_summary(report), indent=2, sort_keys=True) + "\n")
    return json_path

"""Uniform-sampling schedules and the plug-in order-statistic estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .environment import BanditEnv
from .errors import EmptyInput, MissingAssumption
from .model import AssumptionParams, FunctionalSpec, true_functional

MODES = ("theoretical", "unit_constant")


@dataclass(frozen=True)
class Schedule:
    n: int
    m: int
    mode: str
    eps: float
    delta: float

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("schedule needs n, m >= 1")
        if self.mode not in MODES:
            raise ValueError(f"unknown schedule mode {self.mode!r}")

    @property
    def budget(self) -> int:
        return self.n * self.m


@dataclass
class EstimateReport:
    estimate: float
    truth: float
    M: int
    per_arm_counts: list[int]
    schedule: Schedule
    seed: int
    selected: np.ndarray | None = None
    trace: list[tuple[int, float, int, int]] = field(default_factory=list)

    @property
    def abs_err(self) -> float:
        return abs(self.estimate - self.truth)


def _ceil(x: float) -> int:
    # absorb floating noise such as 2/(0.1*0.01) = 2000.0000000000002
    return max(1, math.ceil(x - 1e-9 * max(1.0, abs(x))))


def _floor(x: float) -> int:
    return math.floor(x + 1e-9 * max(1.0, abs(x)))


def _need(params, *names):
    values = []
    for name in names:
        v = getattr(params, name)
        if v is None:
            raise MissingAssumption(f"schedule needs assumption constant {name!r}")
        values.append(float(v))
    return values


def offline_schedule(fn: FunctionalSpec, eps: float, delta: float,
                     params: AssumptionParams, mode: str = "theoretical") -> Schedule:
    """Arms ``n`` and pulls per arm ``m`` for an (eps, delta)-PAC plug-in estimate.

    ``unit_constant`` keeps every power of ``eps`` and ``delta`` (and the
    arguments of logarithms) but drops the leading numeric constants.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if mode not in MODES:
        raise ValueError(f"unknown schedule mode {mode!r}")
    unit = mode == "unit_constant"
    log_inv_delta = math.log(1 / delta)

    if fn.kind == "mean":
        (c,) = _need(params, "var_bound")
        m = 1
        n = _ceil((1.0 if unit else 1.0 + c) / (delta * eps ** 2))
    elif fn.kind == "quantile":
        c1, c2 = _need(params, "c1", "c2")
        if unit:
            m = _ceil(1 / eps)
            n = _ceil(log_inv_delta / eps ** 2)
        else:
            m = _ceil(4 * (c2 + 1) / (c1 * eps))
            n = _ceil(28 * log_inv_delta / (c1 * eps) ** 2)
    elif fn.kind == "maximum":
        c1, beta = _need(params, "c1", "beta")
        lead_n = 1.0 if unit else 2 ** beta / c1
        n = _ceil(lead_n * eps ** -beta * math.log(2 / delta))
        m = _ceil((1.0 if unit else 4.0) * eps ** -2 * math.log(2 * n / delta))
    else:
        c1, c2 = _need(params, "c1", "c2")
        lead_m = 1.0 if unit else 4 * (c2 + 1) / c1
        lead_n = 1.0 if unit else 28.0
        m = _ceil(lead_m / eps * max(math.log(1 / eps), 0.0))
        n = _ceil(lead_n / (eps ** 2 * delta))
    return Schedule(n=n, m=m, mode=mode, eps=float(eps), delta=float(delta))


def order_stat_window(values, alpha1: float, alpha2: float) -> tuple[float, float]:
    """The ``floor(alpha1 n)``-th and ``floor(alpha2 n)``-th order statistics (1-based, clamped)."""
    values = np.asarray(values, dtype=float)
    n = values.size
    if n == 0:
        raise EmptyInput("no values")
    lo_rank = min(max(_floor(alpha1 * n), 1), n)
    hi_rank = min(max(_floor(alpha2 * n), 1), n)
    ranks = np.unique([lo_rank - 1, hi_rank - 1])
    part = np.partition(values, ranks)
    return float(part[lo_rank - 1]), float(part[hi_rank - 1])


def selected_set(values, alpha1: float, alpha2: float) -> np.ndarray:
    """Boolean mask of values inside the closed order-statistic window."""
    values = np.asarray(values, dtype=float)
    lo, hi = order_stat_window(values, alpha1, alpha2)
    return (values >= lo) & (values <= hi)


def _window_mean(values, mask) -> float:
    # summing in sorted order makes the result independent of arm order
    return float(np.mean(np.sort(values[mask])))


def plug_in_estimate(means, alpha1: float, alpha2: float) -> float:
    """Average of the values lying between the two anchor order statistics."""
    if not 0 <= alpha1 <= alpha2 <= 1:
        raise ValueError("need 0 <= alpha1 <= alpha2 <= 1")
    values = np.asarray(means, dtype=float)
    if values.size == 0:
        raise EmptyInput("no values")
    return _window_mean(values, selected_set(values, alpha1, alpha2))


def run_offline(env: BanditEnv, fn: FunctionalSpec, sched: Schedule) -> EstimateReport:
    """Draw ``n`` arms, pull each ``m`` times and return the plug-in estimate."""
    if env.num_arms or env.total_pulls:
        raise ValueError("run_offline needs a fresh environment")
    ids = env.new_arms(sched.n)
    env.pull_many(ids, sched.m)
    means = env.sample_means(ids)
    mask = selected_set(means, fn.alpha1, fn.alpha2)
    estimate = _window_mean(means, mask)
    total, counts = env.stats()
    assert total == sched.n * sched.m
    return EstimateReport(estimate=estimate, truth=true_functional(env.dist, fn), M=total,
                          per_arm_counts=counts, schedule=sched, seed=env.seed,
                          selected=np.flatnonzero(mask))

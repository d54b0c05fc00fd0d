"""Adaptive round-based elimination around the anchor order statistics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .environment import BanditEnv
from .errors import DegenerateM
from .model import AssumptionParams, FunctionalSpec, true_functional
from .offline import (EstimateReport, _window_mean, offline_schedule, order_stat_window,
                      selected_set)


@dataclass
class RoundState:
    r: int
    b: float
    t: int
    active: np.ndarray       # arm ids still being sampled
    estimates: np.ndarray    # running means, frozen once an arm is eliminated
    frozen_round: np.ndarray  # last round in which each arm was active


def round_schedule(r: int, n: int, m: int, delta: float,
                   unit_constant: bool = False) -> tuple[float, int]:
    """Confidence width ``b_r = 2^-r`` and cumulative pull target ``t_r``.

    ``t_r = min(m, ceil(8 b_r^-2 ln(16 n ln m / delta)))``.  ``ln m`` is replaced
    by ``max(ln m, 1)`` for ``m < 3``.  With ``unit_constant`` the numeric
    constants 8 and 16 are dropped.
    """
    if r < 1:
        raise ValueError("rounds start at 1")
    if m < 2:
        raise DegenerateM("round schedule needs m >= 2")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    b = 2.0 ** -r
    lead, inner = (1.0, 1.0) if unit_constant else (8.0, 16.0)
    log_m = max(math.log(m), 1.0) if m < 3 else math.log(m)
    raw = lead * b ** -2 * math.log(inner * n * log_m / delta)
    t = min(m, max(1, math.ceil(raw - 1e-9 * raw)))
    return b, t


def update_active_set(estimates, active, b: float, alpha1: float, alpha2: float) -> np.ndarray:
    """Arms of ``active`` whose estimate is within ``b`` of either anchor.

    Anchors are the order statistics of all estimates, including frozen ones.
    """
    estimates = np.asarray(estimates, dtype=float)
    active = np.asarray(sorted(active), dtype=np.int64)
    lo, hi = order_stat_window(estimates, alpha1, alpha2)
    vals = estimates[active]
    keep = (np.abs(vals - lo) <= b) | (np.abs(vals - hi) <= b)
    return active[keep]


def run_online(env: BanditEnv, fn: FunctionalSpec, eps: float, delta: float,
               params: AssumptionParams, mode: str = "theoretical") -> EstimateReport:
    """Adaptive estimate using the (eps/2, delta/2) offline schedule as its budget."""
    if env.num_arms or env.total_pulls:
        raise ValueError("run_online needs a fresh environment")
    sched = offline_schedule(fn, eps / 2, delta / 2, params, mode)
    n, m = sched.n, sched.m
    a1, a2 = fn.alpha1, fn.alpha2
    ids = env.new_arms(n)
    state = RoundState(r=0, b=1.0, t=0, active=ids.copy(), estimates=np.zeros(n),
                       frozen_round=np.zeros(n, dtype=np.int64))
    trace: list[tuple[int, float, int, int]] = []

    while True:
        r = state.r + 1
        if m < 2:
            b, t = 2.0 ** -r, m
        else:
            b, t = round_schedule(r, n, m, delta, unit_constant=(mode == "unit_constant"))
        active = state.active
        if t > state.t and active.size:
            env.pull_many(active, t - state.t)
            state.estimates[active] = env.sample_means(active)
        state.frozen_round[active] = r
        trace.append((r, b, t, int(active.size)))
        state.r, state.b, state.t = r, b, t
        if t == m:
            break
        state.active = update_active_set(state.estimates, active, b, a1, a2)

    mask = selected_set(state.estimates, a1, a2)
    chosen = np.flatnonzero(mask)
    assert chosen.size >= 1, "empty anchor set"
    if a1 == a2:
        estimate = _window_mean(state.estimates, chosen)
    else:
        # fresh single observations; earlier samples are discarded
        estimate = _window_mean(env.pull_many(chosen, 1), slice(None))
    total, counts = env.stats()
    assert total <= n * m + chosen.size
    return EstimateReport(estimate=estimate, truth=true_functional(env.dist, fn), M=total,
                          per_arm_counts=counts, schedule=sched, seed=env.seed,
                          selected=chosen, trace=trace)


def dump_trace(trace, path) -> None:
    """Write per-round records ``(r, b_r, t_r, |A_r|)`` as newline-delimited JSON."""
    with open(path, "w") as fh:
        for r, b, t, size in trace:
            fh.write(json.dumps({"r": r, "b_r": b, "t_r": t, "active": size}) + "\n")

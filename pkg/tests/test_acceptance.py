"""Acceptance criteria, one test (or one family of tests) per criterion.

Each test records its measurement through the ``detail`` fixture; the terminal
summary prints one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import math
import random
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from bandit_functionals.environment import BanditEnv
from bandit_functionals.harness import SweepConfig, SweepRow, fit_slope, run_sweep, write_rows
from bandit_functionals.lowerbound import (bump_coefficients, grid_from_cdf, is_nonincreasing,
                                           kl_divergence, make_pair, sigma_sweep, smoothed_kl,
                                           smoothing_check, wasserstein2, wasserstein_inf)
from bandit_functionals.lowerbound.bump import BumpSpec
from bandit_functionals.model import (AssumptionParams, BetaTail, FunctionalSpec, Gaussian, Uniform,
                                      check_assumptions)
from bandit_functionals.offline import (Schedule, offline_schedule, plug_in_estimate, run_offline,
                                        selected_set)
from bandit_functionals.online import run_online

GENERIC = AssumptionParams(var_bound=1.0, c0=1.0, c1=1.0, c2=1.0, c3=1.0, c4=1.0, c5=1.0, beta=2.0)


# ---------------------------------------------------------------------------
# 1. zero-noise oracle equivalence


@pytest.mark.criterion("1 zero-noise oracle equivalence")
def test_zero_noise_oracle_equivalence(detail):
    start = time.perf_counter()
    gen = random.Random(2024)
    bounded = [Uniform(0, 1), Uniform(-2, 3), BetaTail(2.0), BetaTail(0.7), BetaTail(3.0, cut=0.1)]
    worst = 0.0
    for case in range(50):
        fn = gen.choice([FunctionalSpec.mean(), FunctionalSpec.median(), FunctionalSpec.maximum(),
                         FunctionalSpec.quantile(round(gen.uniform(0.05, 0.95), 3)),
                         FunctionalSpec.trimmed(round(gen.uniform(0.05, 0.45), 3))])
        pool = bounded if fn.kind == "maximum" else bounded + [Gaussian(0.2, 1.5)]
        dist = gen.choice(pool)
        seed = gen.getrandbits(63)
        eps = gen.uniform(0.15, 0.3)
        env = BanditEnv(dist, noise_sd=0.0, seed=seed)
        rep = run_online(env, fn, eps, 0.1, GENERIC, "unit_constant")
        truth_set = np.flatnonzero(selected_set(env.reveal_means(), fn.alpha1, fn.alpha2))
        assert np.array_equal(rep.selected, truth_set), f"case {case}: anchor sets differ"
        off = run_offline(BanditEnv(dist, noise_sd=0.0, seed=seed), fn,
                          Schedule(rep.schedule.n, rep.schedule.m, "unit_constant", eps, 0.1))
        worst = max(worst, abs(rep.estimate - off.estimate))
    elapsed = time.perf_counter() - start
    detail(f"50 cases, max |online - offline| = {worst:.3g}, {elapsed:.1f} s")
    assert worst <= 1e-12
    assert elapsed < 10


# ---------------------------------------------------------------------------
# 2. PAC audits

PAC_CASES = {
    "mean": (Uniform(0, 1), FunctionalSpec.mean()),
    "median": (Uniform(0, 1), FunctionalSpec.median()),
    "maximum": (BetaTail(2.0), FunctionalSpec.maximum()),
    "trimmed": (Uniform(0, 1), FunctionalSpec.trimmed(0.25)),
}
_PAC_SECONDS = [0.0]


@pytest.mark.slow
@pytest.mark.parametrize("mode", ["offline", "online"])
@pytest.mark.parametrize("name", list(PAC_CASES))
def test_pac_audit(name, mode, request, record_property):
    request.node.add_marker(pytest.mark.criterion(f"2 PAC audit {name}/{mode}"))
    dist, fn = PAC_CASES[name]
    eps, delta, trials = 0.1, 0.1, 500
    params = check_assumptions(dist, fn, eps)
    assert params.ok
    start = time.perf_counter()
    failures = 0
    for seed in range(trials):
        env = BanditEnv(dist, seed=10_000 + seed)
        if mode == "offline":
            rep = run_offline(env, fn, offline_schedule(fn, eps, delta, params))
        else:
            rep = run_online(env, fn, eps, delta, params)
        failures += rep.abs_err > eps
    elapsed = time.perf_counter() - start
    _PAC_SECONDS[0] += elapsed
    rate = failures / trials
    record_property("detail", f"failure rate {rate:.3f} over {trials} trials, n={rep.schedule.n}, "
                              f"m={rep.schedule.m}, {elapsed:.1f} s (audits so far "
                              f"{_PAC_SECONDS[0]:.0f} s)")
    assert rate <= 0.15
    assert _PAC_SECONDS[0] < 600


# ---------------------------------------------------------------------------
# 3. scaling exponents

SCALING = {
    "mean": ("uniform:0,1", "mean", {"offline": (1.8, 2.2), "online": (1.8, 2.2)}),
    "median": ("uniform:0,1", "median", {"offline": (2.7, 3.3), "online": (2.2, 2.8)}),
    "maximum": ("beta_tail:2", "maximum", {"offline": (3.6, 4.4), "online": (1.8, 2.6)}),
    "trimmed": ("uniform:0,1", "trimmed:0.25", {"offline": (2.7, 3.4), "online": (2.2, 2.9)}),
}
_SWEEPS: dict = {}
_SWEEP_SECONDS = [0.0]


def _scaling_report(name):
    if name not in _SWEEPS:
        dist, fn, _ = SCALING[name]
        cfg = SweepConfig(functional=fn, distribution=dist, eps_grid=(0.2, 0.1, 0.05, 0.025),
                          delta=0.1, trials=50, schedule_mode="unit_constant", seed=7)
        start = time.perf_counter()
        _SWEEPS[name] = run_sweep(cfg)
        _SWEEP_SECONDS[0] += time.perf_counter() - start
    return _SWEEPS[name]


@pytest.mark.slow
@pytest.mark.parametrize("mode", ["offline", "online"])
@pytest.mark.parametrize("name", list(SCALING))
def test_scaling_exponent(name, mode, request, record_property):
    request.node.add_marker(pytest.mark.criterion(f"3 scaling slope {name}/{mode}"))
    report = _scaling_report(name)
    lo, hi = SCALING[name][2][mode]
    slope, _, r2 = report.slopes[mode]
    medians = [report.median_samples[(e, mode)] for e in report.config.eps_grid]
    record_property("detail", f"slope {slope:.3f} (r2 {r2:.3f}) vs [{lo}, {hi}]; median M "
                              f"{[int(v) for v in medians]}; sweeps so far {_SWEEP_SECONDS[0]:.0f} s")
    assert lo <= slope <= hi
    assert _SWEEP_SECONDS[0] < 1800


# ---------------------------------------------------------------------------
# 4. KL quadrature calibration


@pytest.mark.criterion("4 KL quadrature calibration")
def test_kl_quadrature_calibration(detail):
    start = time.perf_counter()
    eps, step = 0.05, 0.002
    lo, cells = -12.0, 12_000
    p = grid_from_cdf(lambda x: sps.norm.cdf(x), lo, step, cells)
    q = grid_from_cdf(lambda x: sps.norm.cdf(x, 3 * eps), lo, step, cells)
    kl = kl_divergence(p, q)
    elapsed = time.perf_counter() - start
    target = 9 * eps ** 2 / 2
    detail(f"KL {kl:.6g} vs {target:.6g} (rel err {abs(kl / target - 1):.2e}), {elapsed:.3f} s")
    assert kl == pytest.approx(target, rel=0.01)
    assert elapsed < 1


# ---------------------------------------------------------------------------
# 5. Wasserstein identities


@pytest.mark.criterion("5 Wasserstein identities")
def test_wasserstein_identities(detail):
    start = time.perf_counter()
    eps = 0.1
    dirac = make_pair("mean_dirac", eps)
    w2_d, winf_d = wasserstein2(dirac.F1, dirac.F2), wasserstein_inf(dirac.F1, dirac.F2)
    winf_pair = make_pair("max_winf", eps, beta=2.0)
    winf = wasserstein_inf(winf_pair.F1, winf_pair.F2)
    w2_pair = make_pair("max_w2", eps, beta=2.0)
    w2 = wasserstein2(w2_pair.F1, w2_pair.F2)
    elapsed = time.perf_counter() - start
    detail(f"dirac W2 {w2_d!r} Winf {winf_d!r}; max_winf Winf {winf:.9f}; max_w2 W2 {w2:.5f}; "
           f"{elapsed:.2f} s")
    # 0.6 - 0.4 is 0.19999999999999996 in binary floating point
    assert w2_d == pytest.approx(2 * eps, abs=1e-15)
    assert winf_d == pytest.approx(2 * eps, abs=1e-15)
    assert winf == pytest.approx(eps, abs=1e-6)
    assert w2 <= 0.01
    assert elapsed < 5


# ---------------------------------------------------------------------------
# 6. bump construction


@pytest.mark.criterion("6 bump construction")
def test_bump_construction(detail):
    start = time.perf_counter()
    assert bump_coefficients(1) == (36, -96, 60)
    worst_moment, worst_mass = 0.0, 0.0
    for k in (1, 4, 8):
        for eps in (1.0, 0.01):
            b = BumpSpec(k, eps)
            worst_moment = max(worst_moment, max(abs(b.moment(order)) for order in range(2 * k + 1)))
            worst_mass = max(worst_mass, abs(b.positive_mass() - eps))
    elapsed = time.perf_counter() - start
    detail(f"k=1 coefficients (36, -96, 60); max |moment| {worst_moment:.2e}; "
           f"max mass error {worst_mass:.2e}; {elapsed:.2f} s")
    assert worst_moment <= 1e-8 and worst_mass <= 1e-8
    assert elapsed < 5


# ---------------------------------------------------------------------------
# 7. thresholding phenomenon


@pytest.mark.criterion("7 thresholding phenomenon")
def test_thresholding(detail):
    start = time.perf_counter()
    eps = 0.01
    pair = make_pair("median_pair", eps, k=8)
    low, high = 0.5 * math.sqrt(eps), eps ** 0.3
    sweep = sigma_sweep(pair, sorted({0.01, 0.02, low, 0.08, high, 0.3, 0.6, 1.0}))
    kl = dict(sweep)
    ratio = kl[low] / kl[high]
    monotone = is_nonincreasing(sweep)

    # k=8 bumps do not fit at eps=0.04 (EpsTooLarge); k=2 covers the whole grid
    eps_grid = (0.04, 0.02, 0.01, 0.005)
    points = []
    for e in eps_grid:
        p = make_pair("median_pair", e, k=2)
        s = 0.5 * math.sqrt(e)
        curve = sigma_sweep(p, sorted({0.5 * s, s, 2 * s, 4 * s}))
        monotone &= is_nonincreasing(curve)
        points.append((1 / e, smoothed_kl(p, s)))
    slope = -fit_slope(points)[0]
    elapsed = time.perf_counter() - start
    detail(f"KL ratio {ratio:.3g}; KL-vs-eps slope {slope:.3f} (k=2); nonincreasing {monotone}; "
           f"{elapsed:.1f} s")
    assert ratio >= 100
    assert abs(slope - 1.5) <= 0.3
    assert monotone
    assert elapsed < 300


# ---------------------------------------------------------------------------
# 8. smoothing bound


@pytest.mark.criterion("8 smoothing bound")
def test_smoothing_bound(detail):
    start = time.perf_counter()
    F2 = make_pair("median_pair", 0.01, k=8).F2
    checks = [smoothing_check(F2, m) for m in (100, 400, 1600)]
    elapsed = time.perf_counter() - start
    detail("; ".join(f"m={c.m}: {c.sup_gap:.2e} <= {c.bound:.2e}" for c in checks)
           + f"; c2 {checks[0].slope_bound:.3g}; {elapsed:.1f} s")
    assert all(c.holds for c in checks)
    assert elapsed < 30


# ---------------------------------------------------------------------------
# 9. budget and determinism invariants

DISTS = [Uniform(0, 1), Uniform(-1, 2), BetaTail(2.0), BetaTail(1.2, cut=0.05), Gaussian(0.3, 1.0)]
_PROPERTY = {"cases": 0, "start": None}


@st.composite
def cases(draw):
    fn = draw(st.sampled_from(["mean", "median", "maximum", "quantile", "trimmed"]))
    if fn == "quantile":
        spec = FunctionalSpec.quantile(draw(st.floats(0.05, 0.95)))
    elif fn == "trimmed":
        spec = FunctionalSpec.trimmed(draw(st.floats(0.05, 0.45)))
    else:
        spec = getattr(FunctionalSpec, fn)()
    pool = DISTS[:4] if fn == "maximum" else DISTS
    dist = draw(st.sampled_from(pool))
    return (dist, spec, draw(st.floats(0.2, 0.4)), draw(st.integers(0, 2 ** 63 - 1)),
            draw(st.integers(-64, 64)))


def _row(rep, mode, fn):
    return SweepRow(rep.schedule.eps, mode, fn.label, 0, rep.estimate, rep.truth, rep.abs_err,
                    rep.M, rep.schedule.n, rep.schedule.m, rep.seed)


@pytest.mark.criterion("9 budget and determinism invariants")
@settings(max_examples=200, deadline=None, derandomize=True,
          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
@given(case=cases())
def test_budget_and_determinism(case, tmp_path, request):
    if _PROPERTY["start"] is None:
        _PROPERTY["start"] = time.perf_counter()
    dist, fn, eps, seed, shift = case
    for mode in ("offline", "online"):
        runs = []
        for _ in range(2):
            env = BanditEnv(dist, seed=seed)
            if mode == "offline":
                rep = run_offline(env, fn, offline_schedule(fn, eps, 0.1, GENERIC, "unit_constant"))
            else:
                rep = run_online(env, fn, eps, 0.1, GENERIC, "unit_constant")
            if mode == "offline":
                means = env.sample_means(np.arange(env.num_arms))
            runs.append(rep)
        a, b = runs
        n, m = a.schedule.n, a.schedule.m
        counts = np.asarray(a.per_arm_counts)
        assert a.M == counts.sum() and len(counts) == n
        if mode == "offline":
            assert a.M == n * m and np.all(counts == m)
        else:
            assert np.all(counts <= m + 1) and a.M <= n * m + a.selected.size
            if fn.alpha1 == fn.alpha2:
                assert np.all(counts <= m)
        # byte-identical reruns
        write_rows([_row(a, mode, fn)], tmp_path / f"{mode}-a.csv")
        write_rows([_row(b, mode, fn)], tmp_path / f"{mode}-b.csv")
        assert (tmp_path / f"{mode}-a.csv").read_bytes() == (tmp_path / f"{mode}-b.csv").read_bytes()
        assert a.per_arm_counts == b.per_arm_counts

    # permutation invariance and shift equivariance of the plug-in estimate
    order = np.random.default_rng(seed).permutation(means.size)
    est = plug_in_estimate(means, fn.alpha1, fn.alpha2)
    assert plug_in_estimate(means[order], fn.alpha1, fn.alpha2) == est
    assert np.array_equal(selected_set(means + shift, fn.alpha1, fn.alpha2),
                          selected_set(means, fn.alpha1, fn.alpha2))
    assert plug_in_estimate(means + shift, fn.alpha1, fn.alpha2) == pytest.approx(est + shift,
                                                                                 abs=1e-9)
    _PROPERTY["cases"] += 1
    elapsed = time.perf_counter() - _PROPERTY["start"]
    props = request.node.user_properties
    props[:] = [p for p in props if p[0] != "detail"]
    props.append(("detail", f"{_PROPERTY['cases']} randomized cases passed, {elapsed:.1f} s"))
    assert elapsed < 120

"""Command-line entry point: ``estimate``, ``sweep`` and ``lowerbound`` verbs."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from contextlib import nullcontext

from .errors import ConfigError
from .harness import (CSV_HEADER, SweepConfig, SweepRow, emit_report, parse_distribution,
                      parse_functional, read_config_file, run_single, run_sweep, write_rows)
from .model import check_assumptions

LAB_HEADER = ("eps", "sigma", "kl", "w2", "winf", "gap", "pair_kind", "k")


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bandit-functionals",
                                     description="Functional estimation in infinite-armed bandits.")
    verbs = parser.add_subparsers(dest="verb", required=True)

    est = verbs.add_parser("estimate", help="run one offline or online estimate")
    est.add_argument("--distribution", default="uniform:0,1")
    est.add_argument("--functional", default="median")
    est.add_argument("--eps", type=float, default=0.1)
    est.add_argument("--delta", type=float, default=0.1)
    est.add_argument("--mode", choices=("offline", "online"), default="offline")
    est.add_argument("--schedule-mode", choices=("theoretical", "unit_constant"), default="theoretical")
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--noise-sd", type=float, default=1.0)
    est.add_argument("--output", help="CSV path (default: stdout)")

    sw = verbs.add_parser("sweep", help="epsilon sweep with Monte Carlo repetition")
    sw.add_argument("--config", help="key = value file; its entries override flags")
    sw.add_argument("--functional")
    sw.add_argument("--distribution")
    sw.add_argument("--eps-grid", dest="eps_grid")
    sw.add_argument("--delta")
    sw.add_argument("--trials")
    sw.add_argument("--modes")
    sw.add_argument("--schedule-mode", dest="schedule_mode")
    sw.add_argument("--seed")
    sw.add_argument("--output-path", dest="output_path")
    sw.add_argument("--workers")

    lab = verbs.add_parser("lowerbound", help="lower-bound constructions")
    sub = lab.add_subparsers(dest="lab_verb", required=True)
    for name in ("kl-sweep", "pair-check"):
        p = sub.add_parser(name)
        p.add_argument("--pair", default="median_pair")
        p.add_argument("--eps", default="0.01", help="comma-separated for kl-sweep")
        p.add_argument("--k", type=int, default=8)
        p.add_argument("--beta", type=float, default=2.0)
        p.add_argument("--alpha", type=float, default=0.25)
        p.add_argument("--output", help="output path (default: stdout)")
        if name == "kl-sweep":
            p.add_argument("--sigmas", default="0.05,0.1,0.2,0.5,1.0")
    bump = sub.add_parser("bump-check")
    bump.add_argument("--k", type=int, default=1)
    bump.add_argument("--eps", type=float, default=0.01)
    bump.add_argument("--output")
    return parser


def _open_out(path):
    return open(path, "w", newline="") if path else nullcontext(sys.stdout)


def _cmd_estimate(args) -> None:
    dist = parse_distribution(args.distribution)
    fn = parse_functional(args.functional)
    if not args.eps > 0:
        raise ConfigError("eps", "must be positive")
    if not 0 < args.delta < 1:
        raise ConfigError("delta", "must lie in (0, 1)")
    params = check_assumptions(dist, fn, args.eps)
    if not params.ok:
        raise ConfigError("distribution", "; ".join(params.violations))
    rep = run_single(dist, fn, args.eps, args.delta, params, args.mode, args.schedule_mode,
                     args.seed, args.noise_sd)
    row = SweepRow(eps=args.eps, mode=args.mode, functional=fn.label, trial=0,
                   estimate=rep.estimate, truth=rep.truth, abs_err=rep.abs_err,
                   samples_total=rep.M, n=rep.schedule.n, m=rep.schedule.m, seed=args.seed)
    if args.output:
        write_rows([row], args.output)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerow(row.as_csv())


def _cmd_sweep(args) -> None:
    keys = ("functional", "distribution", "eps_grid", "delta", "trials", "modes",
            "schedule_mode", "seed", "output_path", "workers")
    values = {k: getattr(args, k) for k in keys if getattr(args, k) is not None}
    if args.config:
        try:
            values.update(read_config_file(args.config))
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
    cfg = SweepConfig.from_mapping(values)
    report = run_sweep(cfg)
    json_path = emit_report(report, cfg.output_path)
    print(json_path.read_text(), end="")


def _cmd_lab(args) -> None:
    from .lowerbound import (bump_coefficients, make_pair, sigma_sweep, wasserstein2,
                             wasserstein_inf)
    from .lowerbound.bump import BumpSpec

    if args.lab_verb == "bump-check":
        b = BumpSpec(args.k, args.eps)
        out = {"k": args.k, "eps": args.eps,
               "coefficients": [str(a) for a in bump_coefficients(args.k)],
               "lipschitz": b.lipschitz, "peak": b.peak,
               "max_abs_moment": max(abs(b.moment(order)) for order in range(2 * args.k + 1)),
               "positive_mass": b.positive_mass()}
        with _open_out(args.output) as fh:
            fh.write(json.dumps(out, indent=2) + "\n")
        return

    extra = {"k": args.k, "beta": args.beta, "alpha": args.alpha}
    eps_values = _floats(args.eps)
    if not eps_values:
        raise ConfigError("eps", "no values given")
    if args.lab_verb == "pair-check":
        out = []
        for eps in eps_values:
            pair = make_pair(args.pair, eps, **extra)
            entry = {"pair_kind": pair.kind, "eps": eps, "gap": pair.gap, "gap_ok": pair.gap_ok,
                     "w2": wasserstein2(pair.F1, pair.F2), "winf": wasserstein_inf(pair.F1, pair.F2),
                     "details": pair.extra}
            if hasattr(pair.F2, "density_range"):
                entry["density_range"] = list(pair.F2.density_range())
            out.append(entry)
        with _open_out(args.output) as fh:
            fh.write(json.dumps(out, indent=2) + "\n")
        return

    sigmas = _floats(args.sigmas)
    rows = []
    for eps in eps_values:
        pair = make_pair(args.pair, eps, **extra)
        w2, winf = wasserstein2(pair.F1, pair.F2), wasserstein_inf(pair.F1, pair.F2)
        for sigma, kl in sigma_sweep(pair, sigmas):
            rows.append([repr(eps), repr(sigma), repr(kl), repr(w2), repr(winf), repr(pair.gap),
                         pair.kind, "" if pair.k is None else str(pair.k)])
    with _open_out(args.output) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LAB_HEADER)
        writer.writerows(rows)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.verb == "estimate":
            _cmd_estimate(args)
        elif args.verb == "sweep":
            _cmd_sweep(args)
        else:
            _cmd_lab(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - surface any runtime failure as exit code 2
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: ``test`` (run statistics on a data file with truncation-aware
exact nulls), ``power`` (simulation study from a JSON config), ``nulltab``
(critical-value tables), ``simulate`` (write synthetic significand files),
``qq`` (QQ data of fractional significands against the null), ``density``
(grid of the approximate joint limit density).

Data files are UTF-8 text with one decimal value per line; blank lines and
lines starting with ``#`` are skipped.  Significant digits are counted from
the written string, so trailing zeros count ("1.50" has three digits); this
written-form convention also drives the truncation profile used by the
truncated and rounded nulls.

Every report embeds the seed, replicate count, null kind, tool version and
an input digest, so any run can be reproduced from its own output.  Exit
codes: 0 success, 1 usage error, 2 data or model error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import density_t
from .errors import BenfordLabError, DomainError
from .generators import ManipulationModel, sample_benford, sample_contaminated, \
    sample_manipulated
from .nullmc import ALL_STATISTICS, COMBINED_STATISTICS, NullCache, NullDistribution, \
    combined_null, quantile, run_test, simulate_null, _disc_from_inputs
from .significand import DEFAULT_K, TruncationProfile, digit_counts_by_position, \
    read_significand_file
from .streams import substream
from .studies import PowerStudyConfig, power_study, qq_pairs

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

REPORT_VERSION = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, required=True,
                   help="simulation seed (required; no silent default)")
    p.add_argument("--B", type=int, default=100_000,
                   help="null replicates (default 1e5; 0 = asymptotics only)")
    p.add_argument("--workers", type=int, default=1, help="parallel workers")
    p.add_argument("--cache-dir", default=None, help="directory for null-table cache")


def _build_parser() -> _Parser:
    parser = _Parser(prog="benfordlab", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"benfordlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="test a significand file for Benford conformance")
    p.add_argument("input", help="data file, one decimal value per line")
    p.add_argument("--stat", action="append", choices=ALL_STATISTICS, default=None,
                   help="statistic to run (repeatable; default: full battery)")
    p.add_argument("--gamma", type=float, default=0.01, help="nominal test size")
    p.add_argument("--null", choices=("auto", "plain", "truncated", "rounded"),
                   default="auto", help="null scheme (auto follows the digit counts)")
    p.add_argument("--jitter", choices=("off", "on"), default="off",
                   help="break discretization ties with seeded half-ulp noise")
    p.add_argument("--K", type=int, default=DEFAULT_K, help="digit-count cap")
    p.add_argument("--json", dest="json_out", default=None, help="write JSON report here")
    _add_common(p)

    p = sub.add_parser("power", help="run a power/size study from a JSON config")
    p.add_argument("config", help="JSON file with the study configuration")
    p.add_argument("--csv", dest="csv_out", default=None, help="write CSV rows here")
    p.add_argument("--json", dest="json_out", default=None, help="write JSON report here")
    p.add_argument("--full-scale", action="store_true",
                   help="allow the long reference-scale run (runs>=5000, B>=1e6)")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("nulltab", help="tabulate Monte Carlo critical values")
    p.add_argument("--stat", action="append", choices=ALL_STATISTICS, required=True)
    p.add_argument("--n", action="append", type=int, required=True)
    p.add_argument("--gamma", action="append", type=float, required=True)
    p.add_argument("--csv", dest="csv_out", default=None, help="write CSV here")
    _add_common(p)

    p = sub.add_parser("simulate", help="write a synthetic significand sample")
    p.add_argument("--model", required=True,
                   help="benford | manipulated:FAMILY[:ALPHA] | contaminated:LAMBDA:FAMILY[:ALPHA] | gb:ALPHA")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output file path")
    p.add_argument("--digits", type=int, default=10,
                   help="significant digits written per value")

    p = sub.add_parser("qq", help="QQ data: observed fractional parts vs null quantiles")
    p.add_argument("input")
    p.add_argument("--null", choices=("auto", "plain", "truncated", "rounded"), default="auto")
    p.add_argument("--K", type=int, default=DEFAULT_K)
    p.add_argument("--csv", dest="csv_out", default=None)
    _add_common(p)

    p = sub.add_parser("density", help="CSV grid of the approximate joint limit density")
    p.add_argument("--x1-max", type=float, default=30.0)
    p.add_argument("--x2-max", type=float, default=40.0)
    p.add_argument("--step", type=float, default=0.25)
    p.add_argument("--csv", dest="csv_out", default=None)
    return parser


def _write_csv(path, schema: str, header: list[str], rows):
    out = sys.stdout if path is None else open(path, "w", newline="", encoding="utf-8")
    try:
        out.write(f"# benfordlab csv schema v{REPORT_VERSION}: {schema}\n")
        writer = csv.writer(out)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if path is not None:
            out.close()


def _cmd_test(args) -> int:
    records = read_significand_file(args.input, K=args.K)
    stats = args.stat or list(ALL_STATISTICS)
    cache = NullCache(args.cache_dir) if args.cache_dir else None
    profile = TruncationProfile.from_records(records, K=args.K)
    reports = run_test(records, stats, args.B, args.seed, null_kind=args.null,
                       gamma=args.gamma, K=args.K, jitter=(args.jitter == "on"),
                       workers=args.workers, cache=cache)
    payload = {
        "version": REPORT_VERSION,
        "tool_version": __version__,
        "input": str(args.input),
        "input_sha256": _sha256(args.input),
        "n": profile.n,
        "seed": args.seed,
        "B": args.B,
        "gamma": args.gamma,
        "null": args.null,
        "null_kind": reports[0].null_kind if reports else args.null,
        "jitter": args.jitter,
        "K": args.K,
        "profile": {"counts": list(profile.counts), "n_full": profile.n_full},
        "reports": [r.to_dict() for r in reports],
    }
    print(f"n = {profile.n}  digit counts 1..{args.K}: {list(profile.counts)}  "
          f"full precision: {profile.n_full}")
    print(f"null: {payload['null_kind']}   B = {args.B}   seed = {args.seed}   "
          f"gamma = {args.gamma}")
    for r in reports:
        p_txt = "    n/a" if r.p_value is None else f"{r.p_value:.5f}"
        pa_txt = "" if r.p_asymptotic is None else f"  p_asym = {r.p_asymptotic:.5f}"
        print(f"  {r.stat_id:>6}  value = {r.value:10.5f}  p_exact = {p_txt}{pa_txt}  -> {r.decision}")
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def _cmd_power(args) -> int:
    config = PowerStudyConfig.from_dict(json.loads(Path(args.config).read_text(encoding="utf-8")))
    if (config.runs >= 5000 or config.B >= 1_000_000) and not args.full_scale:
        raise DomainError("reference-scale studies are long; pass --full-scale to confirm")
    report = power_study(config, workers=args.workers)
    rows = [(r.scenario, r.statistic, r.runs, r.rejections, f"{r.rate:.6f}", f"{r.se:.6f}")
            for r in report.rows]
    _write_csv(args.csv_out, "power",
               ["scenario", "statistic", "runs", "rejections", "rate", "se"], rows)
    if args.json_out:
        payload = {
            "version": REPORT_VERSION,
            "tool_version": __version__,
            "config": report.config,
            "runtime_s": report.runtime_s,
            "rows": [vars(r) for r in report.rows],
        }
        Path(args.json_out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"power study: {len(report.rows)} rows in {report.runtime_s:.1f}s", file=sys.stderr)
    return EXIT_OK


def _cmd_nulltab(args) -> int:
    cache = NullCache(args.cache_dir) if args.cache_dir else None
    rows = []
    for n in args.n:
        nulls = {}
        for sid in args.stat:
            if sid in COMBINED_STATISTICS:
                nulls[sid] = combined_null(COMBINED_STATISTICS[sid], n, args.B,
                                           args.seed, workers=args.workers)
            else:
                vec = None
                if cache is not None:
                    vec = cache.load(sid, n, args.B, args.seed, "plain")
                if vec is not None:
                    nd = NullDistribution(stat_id=sid, replicates=np.sort(vec),
                                          B=args.B, n=n, null_kind="plain", seed=args.seed)
                else:
                    nd = simulate_null(sid, n, args.B, args.seed, workers=args.workers)
                    if cache is not None:
                        cache.save(sid, n, args.B, args.seed, "plain", "", nd.replicates)
                nulls[sid] = nd
        for sid in args.stat:
            for gamma in args.gamma:
                cv = quantile(nulls[sid], gamma)
                rows.append((sid, n, args.B, args.seed, "plain", gamma, f"{cv:.6g}"))
    _write_csv(args.csv_out, "nulltab",
               ["statistic", "n", "B", "seed", "null_kind", "gamma", "critical_value"],
               rows)
    return EXIT_OK


def _parse_model_flag(text: str):
    parts = text.split(":")
    if parts[0] == "benford":
        return ("benford", None, None)
    if parts[0] == "gb":
        return ("gb", ManipulationModel.parse(text), None)
    if parts[0] == "manipulated":
        return ("manipulated", ManipulationModel.parse(":".join(parts[1:])), None)
    if parts[0] == "contaminated":
        if len(parts) < 3:
            raise DomainError("contaminated model needs contaminated:LAMBDA:FAMILY[:ALPHA]")
        lam = float(parts[1])
        return ("contaminated", ManipulationModel.parse(":".join(parts[2:])), lam)
    raise DomainError(f"unknown model {text!r}")


def _cmd_simulate(args) -> int:
    kind, model, lam = _parse_model_flag(args.model)
    rng = substream(args.seed, 0)
    if kind == "benford":
        values = sample_benford(args.n, rng)
    elif kind == "gb":
        from .generators import sample_gb
        values = sample_gb(model.alpha, rng, args.n)
    elif kind == "manipulated":
        values = sample_manipulated(args.n, model, rng)
    else:
        values = sample_contaminated(args.n, lam, model, rng)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"# benfordlab simulate model={args.model} n={args.n} seed={args.seed}\n")
        for v in values:
            fh.write(f"{v:.{args.digits - 1}f}\n")
    print(f"wrote {args.n} significands to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_qq(args) -> int:
    records = read_significand_file(args.input, K=args.K)
    if not records:
        from .errors import EmptySample
        raise EmptySample(f"{args.input}: no observations")
    profile = TruncationProfile.from_records(records, K=args.K)
    null_kind = args.null
    if null_kind == "auto":
        null_kind = "truncated" if profile.any_discretized else "plain"
    disc = None
    if null_kind in ("truncated", "rounded"):
        mode = "truncate" if null_kind == "truncated" else "round"
        disc = _disc_from_inputs(profile, digit_counts_by_position(records), mode)
    fracs = np.array([r.frac for r in records])
    emp, null_q = qq_pairs(fracs, len(records), args.B, args.seed, disc=disc,
                           workers=args.workers)
    n = len(emp)
    rows = [(i + 1, f"{(i + 0.5) / n:.6f}", f"{emp[i]:.8f}", f"{null_q[i]:.8f}")
            for i in range(n)]
    _write_csv(args.csv_out, "qq", ["index", "prob", "empirical", "null_quantile"], rows)
    return EXIT_OK


def _cmd_density(args) -> int:
    x1 = np.arange(args.step, args.x1_max + 1e-9, args.step)
    x2 = np.arange(args.step, args.x2_max + 1e-9, args.step)
    rows = []
    for a in x1:
        for b in x2:
            val = density_t(a, b) if b > a else 0.0
            rows.append((f"{a:.4f}", f"{b:.4f}", f"{val:.8e}"))
    _write_csv(args.csv_out, "density", ["x1", "x2", "density"], rows)
    return EXIT_OK


_HANDLERS = {
    "test": _cmd_test,
    "power": _cmd_power,
    "nulltab": _cmd_nulltab,
    "simulate": _cmd_simulate,
    "qq": _cmd_qq,
    "density": _cmd_density,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except (BenfordLabError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

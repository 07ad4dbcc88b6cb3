"""Command-line entry point: ``sumimo {sweep,sinr-surface,histogram,selftest}``."""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .ber import histogram_diagnostics, write_histogram_csv, write_histogram_summary
from .errors import SumimoError
from .sinr import REGIMES, export_surface


def _add_common(p):
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key (repeatable)")


def _config(args):
    return harness.load_config(args.config, args.overrides, seed=args.seed, workers=args.workers)


def _parse_range(text):
    """``a:b[:step]`` (inclusive) or a comma-separated list."""
    if ":" in text:
        parts = [int(v) for v in text.split(":")]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(parts[0], parts[1] + 1, step))
    return [int(v) for v in text.split(",")]


def cmd_sweep(args):
    cfg = _config(args)
    records, problems = harness.run_sweep(cfg, args.out)
    for rec in records:
        print(f"{rec.sinr_db:7.3f} dB  empirical {rec.ber_empirical:.4e}  "
              f"semi-analytic {rec.ber_semianalytic:.4e}  frames {rec.frames}")
    for p in problems:
        print(f"problem at {p['sinr_db']} dB: {p['reason']}", file=sys.stderr)
    return 1 if problems else 0


def cmd_surface(args):
    records = export_surface(
        args.n_tot, args.n_rt, args.rho, args.regime, _parse_range(args.n_t),
        sigma2_h=args.sigma2_h, sigma2_w=args.sigma2_w, path=args.out / "sinr_surface.csv",
    )
    print(f"wrote {len(records)} rows to {args.out / 'sinr_surface.csv'}")
    return 0


def run_histogram(cfg, sinr_db, bins=50, workers=None):
    """Per-frame and pooled histograms of the sign-corrected decoder LLRs."""
    sigma2_w = harness.calibrate(cfg, sinr_db)
    setup = harness.prepare_point(cfg, sigma2_w)
    frames = harness.run_frames(setup, cfg.frames, workers or cfg.workers, keep_llr=True)
    results = {}
    pooled = []
    for fr in frames:
        if fr.failed:
            continue
        results[fr.frame_index] = histogram_diagnostics(fr.signed_llr, bins)
        pooled.append(fr.signed_llr)
    results["pooled"] = histogram_diagnostics(np.concatenate(pooled) if pooled else [], bins)
    failed = sum(fr.failed for fr in frames)
    return results, failed, sigma2_w


def cmd_histogram(args):
    cfg = _config(args)
    results, failed, sigma2_w = run_histogram(cfg, args.sinr_db, args.bins)
    write_histogram_csv(results, args.out / "histogram.csv")
    write_histogram_summary(
        results, args.out / "histogram.json",
        extra={"config": cfg.to_dict(), "sinr_db": args.sinr_db, "sigma2_w": sigma2_w,
               "failed_frames": failed},
    )
    pooled = results["pooled"]
    means = [h.mean for k, h in results.items() if k != "pooled" and h.n]
    print(f"pooled n={pooled.n} mean={pooled.mean:.4g} var={pooled.variance:.4g} "
          f"skew={pooled.skewness:.4g} exkurt={pooled.excess_kurtosis:.4g}")
    if means:
        print(f"frame means: min {min(means):.4g}, max {max(means):.4g}")
    return 1 if failed else 0


def cmd_selftest(args):
    from .selftest import run_all

    bad = 0
    for name, ok, detail in run_all():
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        bad += not ok
    return 1 if bad else 0


def build_parser():
    parser = argparse.ArgumentParser(prog="sumimo", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="BER versus SINR per bit")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sinr-surface", help="closed-form SINR per antenna over a range of N_t")
    p.add_argument("--n-tot", type=int, default=1024)
    p.add_argument("--n-rt", type=int, default=2)
    p.add_argument("--rho", type=float, default=0.9)
    p.add_argument("--regime", choices=REGIMES, default="precoded-before")
    p.add_argument("--n-t", default="1:512", help="range a:b[:step] or list a,b,c")
    p.add_argument("--sigma2-h", type=float, default=0.5)
    p.add_argument("--sigma2-w", type=float, default=0.0, help="0 gives the upper bound")
    p.add_argument("--out", type=Path, default=Path("results"))
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("histogram", help="LLR histograms and moments at one SINR")
    _add_common(p)
    p.add_argument("--sinr-db", type=float, required=True)
    p.add_argument("--bins", type=int, default=50)
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("selftest", help="quick consistency checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SumimoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

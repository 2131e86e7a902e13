"""Command-line interface.

``nmfrank sweep`` runs rank-selection methods over a matrix file and writes
report.json / metrics.csv / plotdata under the output directory.
``nmfrank swimmer`` writes the synthetic swimmer dataset to a file.
Progress goes to stderr; machine-readable output only to files.
"""

import argparse
import logging
import sys

from .matrices import FORMATS, generate_swimmer, save_matrix
from .solver import ALGORITHMS
from .sweep import ALL_METHODS, SweepConfig, emit_report, run_sweep


def build_parser():
    parser = argparse.ArgumentParser(prog="nmfrank")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="run a rank sweep over a matrix file")
    sw.add_argument("--input", required=True, help="path to the input matrix")
    sw.add_argument("--format", choices=FORMATS, default=None,
                    help="input format (default: inferred from extension)")
    sw.add_argument("--header", action="store_true",
                    help="skip a header row in CSV input")
    sw.add_argument("--kmin", type=int, default=2)
    sw.add_argument("--kmax", type=int, default=0,
                    help="default: min(m, n, 64)")
    sw.add_argument("--inits", type=int, default=100,
                    help="random initializations per rank")
    sw.add_argument("--scd-iters", type=int, default=100)
    sw.add_argument("--mu-iters", type=int, default=500)
    sw.add_argument("--algorithm", choices=ALGORITHMS, default="scd")
    sw.add_argument("--methods", default=",".join(ALL_METHODS),
                    help="comma-separated subset of: " + ",".join(ALL_METHODS))
    sw.add_argument("--seed", type=int, default=123456789)
    sw.add_argument("--holdout-fraction", type=float, default=0.10)
    sw.add_argument("--theta", type=float, default=0.25,
                    help="island jump threshold")
    sw.add_argument("--theta-flat", type=float, default=0.05,
                    help="island flatness tolerance")
    sw.add_argument("--threads", type=int, default=1)
    sw.add_argument("--out", default="nmfrank-out", help="output directory")
    sw.add_argument("--normalize-residuals", action="store_true")
    sw.add_argument("--smooth-mci", action="store_true")
    sw.add_argument("--cost-ceiling", type=float, default=1e12,
                    help="projected multiplication budget per method")
    sw.add_argument("--permutation-repeats", type=int, default=0,
                    help="default: same as --inits")
    sw.add_argument("--cv-repeats", type=int, default=0,
                    help="default: same as --inits")

    gen = sub.add_parser("swimmer", help="write the synthetic swimmer dataset")
    gen.add_argument("--out", required=True, help="output file (csv or .mtx)")
    gen.add_argument("--format", choices=FORMATS, default=None)
    return parser


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)

    if args.command == "swimmer":
        save_matrix(args.out, generate_swimmer(), fmt=args.format)
        logging.getLogger("nmfrank").info("wrote swimmer dataset to %s", args.out)
        return 0

    config = SweepConfig(
        input=args.input,
        fmt=args.format or "",
        header=args.header,
        k_min=args.kmin,
        k_max=args.kmax,
        inits=args.inits,
        scd_iters=args.scd_iters,
        mu_iters=args.mu_iters,
        algorithm=args.algorithm,
        methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()),
        seed=args.seed,
        holdout_fraction=args.holdout_fraction,
        theta=args.theta,
        theta_flat=args.theta_flat,
        threads=args.threads,
        out_dir=args.out,
        normalize_residuals=args.normalize_residuals,
        smooth_mci=args.smooth_mci,
        cost_ceiling=args.cost_ceiling,
        permutation_repeats=args.permutation_repeats,
        cv_repeats=args.cv_repeats,
    )
    report, timings = run_sweep(config)
    path = emit_report(report, config.out_dir, timings)
    logging.getLogger("nmfrank").info("report written to %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

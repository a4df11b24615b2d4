"""Command-line front end: one subcommand per experiment family.

    risklab thm1 --seed 7 --trials 20000 --dims 2,8,32 --out runs/demo
    risklab thm2 --condition-positive-price
    risklab cru
    risklab prop3-thm4 --config my.cfg
    risklab checks
    risklab anchors

Every subcommand except ``anchors`` writes results.csv, manifest.txt, and
plotdata/ under --out (default runs/<experiment>).  Flags override the
config file; without --config the built-in default config for the family
is used.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import experiments

_SUBCOMMANDS = ("thm1", "thm2", "cru", "prop3-thm4", "checks", "anchors")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="path to a key = value config file")
    sub.add_argument("--seed", type=int, help="master seed (overrides config)")
    sub.add_argument("--trials", type=int, help="Monte Carlo draws per cell")
    sub.add_argument("--out", help="output directory (default runs/<experiment>)")
    sub.add_argument("--dims", help="comma-separated dimension sweep")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risklab",
        description="Numerical experiments on high-dimensional risk-sharing economies.",
    )
    parser.add_argument("--version", action="version",
                        version=f"risklab {experiments.__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    for name in ("thm1", "thm2", "cru", "prop3-thm4", "checks"):
        help_text = {
            "thm1": "individual eps-improvement probability vs its tail bound",
            "thm2": "aggregate (Scitovsky) improvement probability vs its tail bound",
            "cru": "resource-utilization coefficient and the waste-detection bound",
            "prop3-thm4": "belief-extension emptiness and belief-volume splits",
            "checks": "support invariants: bm, lemma1, kappa, prop7, economy wiring",
        }[name]
        sub = subs.add_parser(name, help=help_text)
        _add_common(sub)
        if name == "thm2":
            sub.add_argument(
                "--condition-positive-price", action="store_true",
                help="condition draws on a positive price move (doubles the bound)",
            )

    subs.add_parser("anchors", help="print the closed-form anchor values and exit")
    return parser


def _config_from_args(args: argparse.Namespace) -> experiments.ExperimentConfig:
    experiment_id = args.command.replace("prop3-thm4", "prop3")
    if args.config:
        config = experiments.load_config(args.config)
        if config.experiment_id != experiment_id and not (
            experiment_id == "checks"
            and config.experiment_id in experiments.CHECK_FAMILIES
        ):
            raise ValueError(
                f"config is for experiment {config.experiment_id!r}, "
                f"but the {args.command} subcommand was invoked"
            )
    else:
        config = experiments.default_config(experiment_id)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.dims is not None:
        overrides["dims"] = tuple(int(x) for x in args.dims.split(","))
    if getattr(args, "condition_positive_price", False):
        overrides["condition_positive_price"] = True
    overrides["out_dir"] = args.out or config.out_dir or f"runs/{config.experiment_id}"
    return replace(config, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "anchors":
        sys.stdout.write(experiments.format_anchor_table())
        return 0
    try:
        config = _config_from_args(args)
        result = experiments.run_experiment(config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    n_err = sum(1 for r in result.rows if r.get("error"))
    n_fail = sum(1 for r in result.rows if r.get("passed") is False)
    print(f"{config.experiment_id}: {len(result.rows)} rows -> {config.out_dir}"
          + (f" ({n_err} error rows)" if n_err else "")
          + (f" ({n_fail} failed checks)" if n_fail else ""))
    return 1 if n_fail else 0


if __name__ == "__main__":
    raise SystemExit(main())

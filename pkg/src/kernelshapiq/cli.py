"""Command-line interface: ``kernelshapiq <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .benchmark import run_benchmark, summarize, validate_conjecture_inverse, validate_conjecture_sii, write_benchmark_csv
from .estimators import ESTIMATORS, EstimatorConfig, estimate
from .exact import exact_ksii, exact_sii, moebius_transform
from .games import Game, LookupGame, SoumGame, generate_soum, load_game, load_soum, store_lookup_game, store_soum
from .values import InteractionValues

log = logging.getLogger("kernelshapiq")

EXIT_FAILED_CHECK = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_CONFIG = 4

METHOD_ALIASES = {"kernelshap-iq": "kernelshapiq", "inconsistent-kernelshapiq": "inconsistent", "shap-iq": "shapiq"}


class InputError(Exception):
    """Unreadable or malformed input file."""


class ConfigError(Exception):
    """Flags that cannot be satisfied together."""


def parse_soum_spec(text: str, default_seed: int) -> SoumGame:
    """``n=20,M=50,max=4,dummy=2[,seed=7]`` or a path to a SOUM JSON file."""
    if Path(text).is_file():
        return _read(load_soum, text)
    try:
        fields = dict(part.split("=", 1) for part in text.split(",") if part)
        n = int(fields.pop("n"))
        m = int(fields.pop("M", fields.pop("m", 50)))
        size = fields.pop("max", "4")
        max_size = None if size in ("all", "none", "None") else int(size)
        dummy = int(fields.pop("dummy", 0))
        seed = int(fields.pop("seed", default_seed))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad SOUM spec {text!r}: expected n=..,M=..,max=..,dummy=..[,seed=..] ({exc})") from None
    if fields:
        raise ConfigError(f"unknown SOUM spec keys {sorted(fields)}")
    try:
        return generate_soum(n, m, max_size, dummy, seed)
    except ValueError as exc:
        raise ConfigError(f"infeasible SOUM spec {text!r}: {exc}") from None


def _read(loader, path):
    try:
        return loader(path)
    except FileNotFoundError:
        raise InputError(f"cannot read {path}: no such file") from None
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot load {path}: {exc}") from None


def _game(args) -> Game:
    if getattr(args, "game", None) and getattr(args, "soum", None):
        raise ConfigError("pass only one of --game and --soum")
    if getattr(args, "game", None):
        return _read(load_game, args.game)
    if getattr(args, "soum", None):
        return parse_soum_spec(args.soum, args.seed)
    raise ConfigError("a game is required: --game <lookup.json> or --soum <spec|path>")


def _emit_values(values: InteractionValues, args):
    if args.format == "csv":
        lines = ["subset,size,value"]
        for mask, value in sorted(values.values.items(), key=lambda kv: (kv[0].bit_count(), kv[0])):
            players = " ".join(str(p) for p in _players(mask))
            lines.append(f"{players},{mask.bit_count()},{value:.17g}")
        text = "\n".join(lines) + "\n"
    else:
        text = values.to_json() + "\n"
    _write(text, args.out)


def _players(mask: int):
    return [i + 1 for i in range(mask.bit_length()) if mask >> i & 1]


def _write(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_exact(args):
    game = _game(args)
    if not 1 <= args.order <= game.n:
        raise ConfigError(f"--order must lie in 1..{game.n}")
    if args.index == "moebius":
        values = moebius_transform(game, force=args.force).restrict(args.order)
    elif isinstance(game, SoumGame) and args.index == "sii":
        values = game.exact_sii(args.order)
    elif args.index == "ksii":
        values = exact_ksii(game, args.order, force=args.force)
    else:
        values = exact_sii(game, args.order, force=args.force)
    _emit_values(values, args)


def _method(name: str) -> str:
    name = METHOD_ALIASES.get(name, name)
    if name not in ESTIMATORS:
        raise ConfigError(f"unknown method {name!r}; choose from {', '.join(sorted(ESTIMATORS))}")
    return name


def cmd_estimate(args):
    game = _game(args)
    if args.order > game.n:
        raise ConfigError(f"--order {args.order} exceeds n={game.n}")
    try:
        config = EstimatorConfig(args.order, args.budget, mu_inf=args.mu_inf, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    result = estimate(_method(args.method), game, config)
    _emit_values(result.ksii if args.index == "ksii" else result.sii, args)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def cmd_benchmark(args):
    game = _game(args)
    methods = [_method(m) for m in args.methods.split(",") if m]
    if max(args.orders) > game.n:
        raise ConfigError(f"orders exceed n={game.n}")
    if min(args.budgets) < 2:
        raise ConfigError("every budget must be at least 2")
    if game.n > 20 and not isinstance(game, SoumGame):
        raise ConfigError("ground truth needs a SOUM or n <= 20")
    rows = run_benchmark(
        game, methods, args.orders, args.budgets, args.runs, args.seed, args.index, args.mu_inf, timing=args.timing
    )
    if args.out:
        write_benchmark_csv(rows, args.out)
    else:
        write_benchmark_csv(rows, sys.stdout)
    for (method, order, budget), stats in summarize(rows).items():
        log.info("%-13s order=%d budget=%6d median mse=%.3e prec@10=%.3f", method, order, budget, stats["median_mse"], stats["mean_prec_at_10"])


def cmd_validate(args):
    if args.n_min < 2 or args.n_max < args.n_min:
        raise ConfigError("need 2 <= --n-min <= --n-max")
    reports = [validate_conjecture_inverse((args.n_min, args.n_max), args.mu_inf)]
    if not args.skip_sii:
        reports.append(
            validate_conjecture_sii(
                (args.n_min, args.n_max), args.n_soums, args.m_terms, args.seed, args.mu_inf, limit=not args.finite
            )
        )
    for report in reports:
        print(report.table())
    if args.out:
        Path(args.out).write_text(json.dumps([r.to_dict() for r in reports], indent=1) + "\n")
    return 0 if all(r.passed for r in reports) else EXIT_FAILED_CHECK


def cmd_gen_soum(args):
    game = parse_soum_spec(f"n={args.n},M={args.m_terms},max={args.max_size},dummy={args.dummy},seed={args.seed}", args.seed)
    if args.out:
        store_soum(game, args.out)
    else:
        print(json.dumps(game.to_dict()))


def cmd_precompute(args):
    game = _game(args)
    if game.n > 20 and not args.force:
        raise ConfigError(f"lookup table for n={game.n} has 2^{game.n} entries; pass --force")
    table = LookupGame.from_game(game, force=args.force)
    if args.out:
        store_lookup_game(table, args.out)
    else:
        print(json.dumps(table.to_dict()))


def _game_flags(p):
    p.add_argument("--game", help="lookup-game JSON ({n, values}) or SOUM JSON ({n, terms})")
    p.add_argument("--soum", help="SOUM spec n=..,M=..,max=..,dummy=..[,seed=..] or SOUM JSON path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kernelshapiq", description="Shapley interaction indices: exact values and estimators.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, order=True):
        _game_flags(p)
        if order:
            p.add_argument("--order", type=int, default=2)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--mu-inf", type=float, default=1e6)
        p.add_argument("--out")

    p = sub.add_parser("exact", help="brute-force (or analytic SOUM) SII / k-SII / Moebius")
    common(p)
    p.add_argument("--index", choices=("sii", "ksii", "moebius"), default="sii")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--force", action="store_true", help="allow n > 20")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("estimate", help="run one estimator")
    common(p)
    p.add_argument("--method", default="kernelshapiq")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--index", choices=("sii", "ksii"), default="sii")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("benchmark", help="MSE / Prec@10 sweep, CSV output")
    common(p, order=False)
    p.add_argument("--methods", default="kernelshapiq,inconsistent,permutation,shapiq")
    p.add_argument("--orders", type=_int_list, default=[2])
    p.add_argument("--budgets", type=_int_list, required=True)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--index", choices=("sii", "ksii"), default="sii")
    p.add_argument("--format", choices=("csv",), default="csv")
    p.add_argument("--timing", action="store_true", help="record wall-clock runtime (output no longer reproducible)")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("validate-conjectures", help="check the closed-form precision matrix and split representation")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=11)
    p.add_argument("--n-soums", type=int, default=10)
    p.add_argument("--m-terms", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mu-inf", type=float, default=1e7)
    p.add_argument("--finite", action="store_true", help="use mu_inf as a finite weight in the split check")
    p.add_argument("--skip-sii", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen-soum", help="write a random SOUM as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m-terms", type=int, default=50)
    p.add_argument("--max-size", default="4")
    p.add_argument("--dummy", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_soum)

    p = sub.add_parser("precompute", help="tabulate a game into a lookup JSON file")
    _game_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_precompute)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s", stream=sys.stderr)
    try:
        code = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return int(code or 0)


cli_main = main


if __name__ == "__main__":
    sys.exit(main())

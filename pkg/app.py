# -*- coding: utf-8 -*-
# ! python3

# Developed by: Envelopes Lab contributors
# Created: 19.10.2026
# Updated: 19.10.2026

"""
Command-line entry point.

    python app.py posterior --prior broome --a 2
    python app.py simulate --schema conditional --x 20 --n 1000000 --seed 7
    python app.py cover --pairs pairs.csv --n 100000
    python app.py game --arranger arranger.json --player player.json
    python app.py broome-table --n-max 10
"""

import argparse
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Optional, Sequence

from system.amounts import format_amount, to_amount
from system.cover import PROBES, estimate_win_rate, load_pairs, load_probe, report_rows
from system.exception_handler import BaseError, UsageError
from system.game import adversary_report, cover_vs_arranger, exact_win_value, load_arranger, load_player
from system.logger import Logger
from system.posterior import describe
from system.priors import (
    BroomePrior,
    ContinuousPrior,
    check_normalization,
    check_proper,
    find_half_half_violation,
    load_prior,
)
from system.reports import FORMATS, cmd_broome_table, emit, rational, render, to_json
from system.rng_streams import check_seed
from system.simulation import (
    AliBabaReport,
    diverging_mean_diagnostic,
    make_schema,
    run_fixed_pair,
    run_schema,
    trial_rows,
)

SCHEMAS: tuple[str, ...] = ('fixed', 'conditional', 'prior', 'alibaba')

EXIT_OK: int = 0
EXIT_DOMAIN: int = 1
EXIT_USAGE: int = 2


# --------------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------------

class ArgumentParser(argparse.ArgumentParser):
    """Reports parse errors as UsageError instead of exiting."""

    def error(self, message: str) -> None:
        raise UsageError(message, usage=self.format_usage().strip())


def _seed(value: str) -> int:
    try:
        return check_seed(int(value))
    except (ValueError, UsageError):
        raise argparse.ArgumentTypeError(f"invalid seed: {value!r}")


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer: {value!r}")
    return number


def _amount(value: str, flag: str) -> Fraction:
    try:
        return to_amount(value)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--{flag} must be an exact amount such as 3 or 3/2", value=value)


def _number(value: str, flag: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise UsageError(f"--{flag} must be a number", value=value)


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument('--seed', type=_seed, default=0, help="unsigned 64-bit seed (default 0)")
    common.add_argument('--format', choices=FORMATS, default='json', help="output format")
    common.add_argument('--out', default=None, help="output file (default stdout)")
    common.add_argument('--threads', type=int, default=None, help="worker threads (0 = physical cores)")

    parser = ArgumentParser(prog='envelopes', description="Two-envelope paradox lab")
    commands = parser.add_subparsers(dest='command', required=True, parser_class=ArgumentParser)

    prior = commands.add_parser('prior', parents=[common], help="properness and half-half diagnostics")
    prior.add_argument('--prior', required=True, help="built-in name or JSON file")
    prior.add_argument('--terms', type=_positive_int, default=10, help="partial means shown for Broome")

    posterior = commands.add_parser('posterior', parents=[common], help="split and decisions at A = a")
    posterior.add_argument('--prior', required=True, help="built-in name or JSON file")
    posterior.add_argument('--a', required=True, help="observed amount (exact, e.g. 3/2)")

    simulate = commands.add_parser('simulate', parents=[common], help="Monte Carlo schemas")
    simulate.add_argument('--schema', choices=SCHEMAS, required=True)
    simulate.add_argument('--x', default=None, help="amount for fixed, conditional and alibaba")
    simulate.add_argument('--prior', default=None, help="prior for the prior schema")
    simulate.add_argument('--a', default=None, help="conditioning amount for the prior schema")
    simulate.add_argument('--n', type=_positive_int, default=100000, help="trials (accepted trials for prior)")
    simulate.add_argument('--measure', choices=('gain', 'content'), default='gain', help="fixed schema only")
    simulate.add_argument('--csv', '--trials-out', dest='trials_out', default=None,
                          help="CSV file for the first trials (trial,a,b,gain)")
    simulate.add_argument('--rows', type=_positive_int, default=None, help="rows in --csv")

    cover = commands.add_parser('cover', parents=[common], help="randomized switching win rates")
    cover.add_argument('--pairs', default=None, help="CSV with columns a,b")
    cover.add_argument('--a', type=float, default=None)
    cover.add_argument('--b', type=float, default=None)
    cover.add_argument('--probe', choices=sorted(PROBES), default='exponential')
    cover.add_argument('--n', type=_positive_int, default=100000, help="trials per pair")
    cover.add_argument('--lazy-trials', type=int, default=None, help="lazy comparisons for bits_mean")

    game = commands.add_parser('game', parents=[common], help="arranger against player")
    game.add_argument('--arranger', required=True, help="arranger JSON file")
    game.add_argument('--player', default=None, help="player JSON file")
    game.add_argument('--cover', action='store_true', help="value of the probe strategy")
    game.add_argument('--probe', choices=sorted(PROBES), default='exponential')
    game.add_argument('--epsilon', type=float, default=None, help="shift adversary target")

    table = commands.add_parser('broome-table', parents=[common], help="posterior table under Broome's prior")
    table.add_argument('--n-max', type=int, default=10)

    return parser


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int
    format: str
    out: Optional[str]
    threads: Optional[int]

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> 'RunConfig':
        return cls(command=args.command, seed=args.seed, format=args.format, out=args.out, threads=args.threads)


# --------------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------------

def cmd_prior(args: argparse.Namespace, run: RunConfig) -> tuple[Any, Optional[list]]:
    prior = load_prior(args.prior)
    if isinstance(prior, ContinuousPrior):
        return {'prior': prior.label, 'type': 'continuous', 'normalization_error': check_normalization(prior)}, None

    check = check_proper(prior)
    payload = {
        'prior': prior.label,
        'proper': check.proper,
        'total_mass': rational(check.total_mass),
    }
    if check.proper:
        payload['half_half_witness'] = format_amount(find_half_half_violation(prior))
    if isinstance(prior, BroomePrior):
        payload['diverging_mean'] = diverging_mean_diagnostic(prior, args.terms).to_dict()
    return payload, None


def cmd_posterior(args: argparse.Namespace, run: RunConfig) -> tuple[Any, Optional[list]]:
    prior = load_prior(args.prior)
    a = _number(args.a, 'a') if isinstance(prior, ContinuousPrior) else _amount(args.a, 'a')
    return describe(prior, a), None


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{name}" for name in names if getattr(args, name) is None]
    if missing:
        raise UsageError(f"Schema {args.schema} requires {', '.join(missing)}")


def cmd_simulate(args: argparse.Namespace, run: RunConfig) -> tuple[Any, Optional[list]]:
    if args.schema == 'prior':
        _require(args, 'prior', 'a')
        schema = make_schema('prior', prior=load_prior(args.prior), a=_amount(args.a, 'a'))
    else:
        _require(args, 'x')
        schema = make_schema(args.schema, x=_amount(args.x, 'x'))

    if args.schema == 'fixed':
        result = run_fixed_pair(schema.x, args.n, run.seed, measure=args.measure, threads=run.threads)
    else:
        result = run_schema(schema, args.n, run.seed, threads=run.threads)

    if args.trials_out:
        emit(render(trial_rows(schema, args.n, run.seed, limit=args.rows), 'csv'), args.trials_out)

    payload = result.to_dict()
    if isinstance(result, AliBabaReport):
        rows = [result.baba_content.to_dict(), result.ali_over_baba.to_dict(), result.combined.to_dict()]
        return payload, rows
    return payload, None


def cmd_cover(args: argparse.Namespace, run: RunConfig) -> tuple[Any, Optional[list]]:
    if args.pairs:
        pairs = load_pairs(args.pairs)
    elif args.a is not None and args.b is not None:
        pairs = [(args.a, args.b)]
    else:
        raise UsageError("cover requires --pairs or both --a and --b")

    reports = estimate_win_rate(pairs, load_probe(args.probe), args.n, run.seed, threads=run.threads,
                                lazy_trials=args.lazy_trials)
    payload = {
        'seed': run.seed,
        'probe': args.probe,
        'n_per_pair': args.n,
        'pairs': [report.to_dict() for report in reports],
    }
    return payload, report_rows(reports)


def cmd_game(args: argparse.Namespace, run: RunConfig) -> tuple[Any, Optional[list]]:
    if args.player is None and not args.cover:
        raise UsageError("game requires --player or --cover")
    arranger = load_arranger(args.arranger)
    payload: dict[str, Any] = {'arranger': arranger.to_dict()}

    if args.player is not None:
        player = load_player(args.player)
        payload['player'] = player.to_dict()
        payload['win_value'] = rational(exact_win_value(arranger, player))
    if args.cover:
        probe = load_probe(args.probe)
        payload['probe'] = args.probe
        payload['cover_value'] = cover_vs_arranger(arranger, probe)
        if args.epsilon is not None:
            payload['adversary'] = adversary_report(probe, args.epsilon).to_dict()
    return payload, None


def cmd_broome(args: argparse.Namespace, run: RunConfig) -> tuple[Any, Optional[list]]:
    rows = cmd_broome_table(args.n_max)
    return {'prior': 'broome', 'rows': rows}, rows


COMMANDS: dict[str, Callable[[argparse.Namespace, RunConfig], tuple[Any, Optional[list]]]] = {
    'prior': cmd_prior,
    'posterior': cmd_posterior,
    'simulate': cmd_simulate,
    'cover': cmd_cover,
    'game': cmd_game,
    'broome-table': cmd_broome,
}


# --------------------------------------------------------------------------------
# Dispatch
# --------------------------------------------------------------------------------

def _fail(error: dict, code: int) -> int:
    print(to_json(error, single_line=True), file=sys.stderr)
    return code


def cmd_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parses argv, runs the subcommand and emits its output.

    Returns:
        int: 0 on success, 1 on domain errors, 2 on usage errors.
    """
    try:
        args = build_parser().parse_args(argv)
        run = RunConfig.from_namespace(args)
        payload, rows = COMMANDS[run.command](args, run)
        emit(render(payload, run.format, rows), run.out)
        return EXIT_OK
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except UsageError as e:
        return _fail(e.to_dict(), EXIT_USAGE)
    except BaseError as e:
        Logger().info(f"Command failed: {e}")
        return _fail(e.to_dict(), EXIT_DOMAIN)
    except OSError as e:
        return _fail({'error': 'UsageError', 'message': str(e), 'details': {}}, EXIT_USAGE)
    except Exception as e:
        Logger().log_exception()
        return _fail({'error': type(e).__name__, 'message': str(e), 'details': {}}, EXIT_DOMAIN)


main = cmd_dispatch


# --------------------------------------------------------------------------------
# Run
# --------------------------------------------------------------------------------

if __name__ == '__main__':
    sys.exit(cmd_dispatch())

"""``smb-lab`` command line.
::

    $ smb-lab run configs/markov_mixing.json --seed 3 --output-dir out/
    $ smb-lab compare out/mixing.json baseline/mixing.json
    $ smb-lab validate specs/markov_example.json

Exit codes: 0 when every pass flag holds (or the compared reports agree), 1 when
a pass flag fails (or the reports differ), 2 on a computation error, 3 on a
config, spec or schema error.
"""
import argparse
import logging
import sys

from . import __version__, exceptions
from .config import load_config
from .negotiation import render_json
from .process import load_spec
from .reports import compare_reports
from .runner import run

__all__ = (
    'EXIT_OK',
    'EXIT_FAILED',
    'EXIT_COMPUTATION',
    'EXIT_CONFIG',
    'main',
    'make_parser',
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_COMPUTATION = 2
EXIT_CONFIG = 3

LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


def make_parser():
    parser = argparse.ArgumentParser(
        prog='smb-lab',
        description='Exact and Monte Carlo statistics of stationary symbolic processes.',
    )
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='-v for progress, -vv for debug output')
    subparsers = parser.add_subparsers(dest='action', required=True)

    run_parser = subparsers.add_parser('run', help='run an experiment config')
    run_parser.add_argument('config', help='path to the experiment config (JSON)')
    run_parser.add_argument('--seed', type=int, default=None, help='override the seed')
    run_parser.add_argument('--output-dir', default=None, help='override the output directory')

    compare_parser = subparsers.add_parser('compare', help='diff two report files')
    compare_parser.add_argument('a')
    compare_parser.add_argument('b')
    compare_parser.add_argument('--tolerance', type=float, default=0.0,
                                help='largest absolute deviation still counted as equal')

    validate_parser = subparsers.add_parser('validate', help='validate a spec file')
    validate_parser.add_argument('spec')
    return parser


def _run(args, stream):
    config = load_config(args.config, seed=args.seed, output_dir=args.output_dir)
    envelope = run(config, stream=stream)
    failed = sorted(name for name, value in envelope.pass_flags.items() if not value)
    if failed:
        logger.warning('Failed checks: %s', ', '.join(failed))
        return EXIT_FAILED
    return EXIT_OK


def _compare(args, stream):
    diff = compare_reports(args.a, args.b)
    stream.write(render_json({
        'command': diff.command,
        'max_deviation': diff.max_deviation,
        'mismatched_cells': diff.mismatched_cells,
        'pass_flags_differ': diff.pass_flags_differ,
    }) + '\n')
    return EXIT_OK if diff.within(args.tolerance) else EXIT_FAILED


def _validate(args, stream):
    spec = load_spec(args.spec)
    stream.write(render_json({
        'spec': spec.to_dict(),
        'spec_hash': spec.spec_hash,
        'alphabet_size': spec.size,
    }) + '\n')
    return EXIT_OK


ACTIONS = {
    'run': _run,
    'compare': _compare,
    'validate': _validate,
}


def main(argv=None, stream=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(
        level=LOG_LEVELS[min(args.verbose, len(LOG_LEVELS) - 1)],
        format='%(levelname)s %(name)s: %(message)s',
    )
    stream = stream if stream is not None else sys.stdout
    try:
        return ACTIONS[args.action](args, stream)
    except exceptions.ComputationError as error:
        logger.error('%s', error)
        return EXIT_COMPUTATION
    except (exceptions.SmbLabError, OSError, ValueError) as error:
        logger.error('%s', error)
        return EXIT_CONFIG

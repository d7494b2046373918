import argparse
import dataclasses
import logging
import os
import sys
from typing import List, Optional, Sequence

from . import exception
from .configfile import read_config, parse_overrides, render_config
from .consts import DEFAULT_SEED, SEED_ENV, DEFAULT_MINERS, DEFAULT_INSTANCES, DEFAULT_PROBE_INSTANCES, \
    MECHANISM_MDB, MODE_MULTI, MODE_CONSTANT, EXIT_OK, EXIT_ERROR, EXIT_INVALID_INPUT, EXIT_INVALID_CONFIG, \
    EXIT_TOO_LARGE, EXIT_PROBE_VIOLATION
from .instancefile import read_instance, instance_file
from .mechanism import MechanismRegistry, default_registry
from .model import MarketConfig, AuctionOutcome
from .output import OutputFile_Csv, OutputFile_Yaml, OutputFile, output_driver
from .simlab import SweepSpec, SweepResult, preset, preset_names, load_sweep_spec, run_sweep, \
    threshold_curves, probe_campaign, gen_instance, point_seed, instance_seed, PRESET_FIG5A, FIG5A_S_LEVELS
from .types import TMechanism, TDemandMode
from .util import format_number

logger = logging.getLogger(__name__)

AUCTION_COLUMNS = ('miner_id', 's', 'd', 'b', 'x', 'payment', 'ex_post_value', 'utility')
SWEEP_COLUMNS = ('parameter_value', 'mean_welfare', 'ci_halfwidth', 'mean_satisfaction', 'K', 'seed')

_EXIT_CODES = (
    (exception.InstanceTooLargeError, EXIT_TOO_LARGE),
    ((exception.ConfigError, exception.ConfigFileError, exception.OptionError, exception.TypeError,
      exception.MergeError, exception.NotSupportedError), EXIT_INVALID_CONFIG),
    ((exception.InstanceFileError, exception.SweepError, exception.NotFoundError,
      exception.InvalidParamError), EXIT_INVALID_INPUT),
)


def exit_code(e: exception.CMException) -> int:
    """
    Exit code of an error raised while running a command.
    """
    for types, code in _EXIT_CODES:
        if isinstance(e, types):
            return code
    return EXIT_ERROR


def resolve_seed(seed: Optional[int]) -> int:
    """
    The master seed: the flag value, else the :data:`chainmarket.consts.SEED_ENV` variable, else the default.

    :raises: :class:`chainmarket.exception.InvalidParamError`
    """
    if seed is None:
        env = os.environ.get(SEED_ENV)
        if env is None or env.strip() == '':
            return DEFAULT_SEED
        try:
            seed = int(env)
        except ValueError as e:
            raise exception.InvalidParamError('{} is not an integer: "{}"'.format(SEED_ENV, env)) from e
    if not (0 <= seed < 2 ** 64):
        raise exception.InvalidParamError('Seed must be an unsigned 64-bit integer: {}'.format(seed))
    return seed


def _config(args: argparse.Namespace) -> MarketConfig:
    return read_config(args.config, parse_overrides(args.set))


def _write(file: OutputFile, path: Optional[str]) -> None:
    output_driver(path).output(file)


def _progress() -> bool:
    return sys.stderr.isatty() and logging.getLogger().getEffectiveLevel() > logging.DEBUG


#
# Commands
#

def outcome_file(outcome: AuctionOutcome, filename: Optional[str] = None) -> OutputFile_Csv:
    """
    Per-miner outcome rows in canonical order plus a ``#`` summary line.
    """
    ret = OutputFile_Csv(filename, AUCTION_COLUMNS)
    x = outcome.x
    for m in outcome.instance.miners:
        ret.append((m.id, m.s, m.d, m.b, x[m.id], outcome.payment(m.id), outcome.ex_post_value(m.id),
                    outcome.utility(m.id)))
    ret.comment('welfare={} allocated={} winners={} satisfaction_rate={}'.format(
        format_number(outcome.welfare), format_number(outcome.allocated), len(outcome.winners),
        format_number(outcome.satisfaction_rate)))
    return ret


def cmd_auction(args: argparse.Namespace, registry: MechanismRegistry) -> int:
    cfg = _config(args)
    inst = read_instance(args.instance, cfg)
    mechanism = registry.get(args.mechanism)
    outcome = mechanism.run(inst)
    logger.info('%s auction: %d winners of %d, welfare %g', mechanism.name, len(outcome.winners),
                len(inst), outcome.welfare)
    _write(outcome_file(outcome, args.out), args.out)
    return EXIT_OK


def sweep_file(result: SweepResult, filename: Optional[str] = None) -> OutputFile_Csv:
    ret = OutputFile_Csv(filename, SWEEP_COLUMNS)
    for p in result.points:
        ret.append((p.parameter_value, p.mean_welfare, p.ci_halfwidth, p.mean_satisfaction, p.instances, p.seed))
    return ret


def _sweep_spec(args: argparse.Namespace, seed: int) -> SweepSpec:
    if (args.preset is None) == (args.spec is None):
        raise exception.InvalidParamError('Sweep needs exactly one of --preset and --spec')
    if args.preset is not None:
        return preset(args.preset, master_seed=seed, config=_config(args),
                      mechanism=TMechanism(args.mechanism) if args.mechanism is not None else None,
                      instances=args.instances if args.instances is not None else DEFAULT_INSTANCES,
                      miners=args.miners if args.miners is not None else DEFAULT_MINERS)

    spec = load_sweep_spec(args.spec, master_seed=seed, base=read_config(args.config))
    changes = {}
    overrides = parse_overrides(args.set)
    if overrides:
        changes['config'] = spec.config.with_overrides(overrides)
    if args.seed is not None:
        changes['master_seed'] = seed
    if args.mechanism is not None:
        changes['mechanism'] = TMechanism(args.mechanism)
    if args.instances is not None:
        changes['instances'] = args.instances
    if args.miners is not None:
        changes['miners'] = args.miners
    return dataclasses.replace(spec, **changes) if changes else spec


def cmd_sweep(args: argparse.Namespace, registry: MechanismRegistry) -> int:
    seed = resolve_seed(args.seed)
    if args.preset == PRESET_FIG5A:
        curve_seed, rows = threshold_curves(_config(args), master_seed=seed,
                                            miners=args.miners if args.miners is not None else DEFAULT_MINERS)
        out = OutputFile_Csv(args.out, ('parameter_value',) +
                             tuple('utility_s{}'.format(format_number(s)) for s in FIG5A_S_LEVELS) + ('seed',))
        for row in rows:
            out.append(row + (curve_seed,))
        _write(out, args.out)
        return EXIT_OK
    if args.preset is not None and args.preset not in preset_names():
        raise exception.SweepError('Unknown preset: "{}", available: {}'.format(
            args.preset, ', '.join(preset_names())))

    spec = _sweep_spec(args, seed)
    result = run_sweep(spec, jobs=args.jobs, registry=registry, progress=_progress())
    _write(sweep_file(result, args.out), args.out)
    return EXIT_OK


def cmd_probe(args: argparse.Namespace, registry: MechanismRegistry) -> int:
    seed = resolve_seed(args.seed)
    if args.instances < 1:
        raise exception.InvalidParamError('Probe needs at least one instance: {}'.format(args.instances))
    mechanism = registry.probed(args.mechanism)
    report = probe_campaign(mechanism, _config(args), instances=args.instances, master_seed=seed,
                            progress=_progress())
    out = OutputFile_Yaml(args.out)
    out.append(report.to_dict())
    _write(out, args.out)
    if not report.passed:
        logger.error('probe of %s failed: %s', mechanism.name, report.violations())
        return EXIT_PROBE_VIOLATION
    return EXIT_OK


def cmd_gen(args: argparse.Namespace, registry: MechanismRegistry) -> int:
    seed = resolve_seed(args.seed)
    cfg = _config(args)
    inst = gen_instance(cfg, args.miners, TDemandMode(args.mode), instance_seed(point_seed(seed, 0), 0))
    _write(instance_file(inst, args.out), args.out)
    if args.config_out is not None:
        out = OutputFile(args.config_out)
        out.append(render_config(cfg))
        _write(out, args.config_out)
    return EXIT_OK


#
# Parser
#

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', metavar='PATH', help='market configuration file (key = value lines)')
    parser.add_argument('--set', metavar='KEY=VALUE', action='append', default=[],
                        help='configuration override, repeatable')
    parser.add_argument('--seed', type=int, metavar='U64',
                        help='master seed, defaults to ${} or {}'.format(SEED_ENV, DEFAULT_SEED))
    parser.add_argument('--out', metavar='PATH', help='output file, standard output if omitted')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='more logging, repeatable')
    parser.add_argument('-q', '--quiet', action='store_true', help='log errors only')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='chainmarket',
                                     description='Resource auctions for blockchain miners')
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    p = sub.add_parser('auction', help='run one auction on an instance file')
    _add_common(p)
    p.add_argument('--mechanism', default=MECHANISM_MDB, help='cdb, mdb, frls or brute')
    p.add_argument('--instance', required=True, metavar='PATH', help='instance CSV (id,s,d[,b])')
    p.set_defaults(func=cmd_auction)

    p = sub.add_parser('sweep', help='run a parameter sweep')
    _add_common(p)
    p.add_argument('--preset', metavar='NAME', help=', '.join(preset_names()))
    p.add_argument('--spec', metavar='PATH', help='YAML sweep spec')
    p.add_argument('--mechanism', help='replace the sweep mechanism')
    p.add_argument('--instances', type=int, metavar='K', help='instances per grid point')
    p.add_argument('--miners', type=int, metavar='N', help='market size when N is not swept')
    p.add_argument('--jobs', type=int, default=1, metavar='J', help='worker processes')
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser('probe', help='probe truthfulness and the other mechanism properties')
    _add_common(p)
    p.add_argument('--mechanism', default=MECHANISM_MDB, help='cdb or mdb')
    p.add_argument('--instances', type=int, default=DEFAULT_PROBE_INSTANCES, metavar='K',
                   help='random markets to probe')
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser('gen', help='write a random instance file')
    _add_common(p)
    p.add_argument('--miners', type=int, default=DEFAULT_MINERS, metavar='N')
    p.add_argument('--mode', choices=[MODE_MULTI, MODE_CONSTANT], default=MODE_MULTI)
    p.add_argument('--config-out', metavar='PATH', help='also write the configuration used')
    p.set_defaults(func=cmd_gen)
    return parser


def _log_level(args: argparse.Namespace) -> int:
    if args.quiet:
        return logging.ERROR
    return [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]


def main(argv: Optional[Sequence[str]] = None, registry: Optional[MechanismRegistry] = None) -> int:
    """
    Runs a command and returns its exit code.

    :param argv: arguments without the program name, ``sys.argv[1:]`` if None
    :param registry: mechanisms addressable by ``--mechanism``, :func:`default_registry` if None
    """
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return EXIT_INVALID_INPUT if e.code else EXIT_OK

    logging.basicConfig(level=_log_level(args), format='%(levelname)s %(name)s: %(message)s')
    if registry is None:
        registry = default_registry()
    try:
        return args.func(args, registry)
    except exception.CMException as e:
        code = exit_code(e)
        logger.error('%s: %s', type(e).__name__, e)
        return code


def run(argv: Optional[List[str]] = None) -> None:
    """Console entry point."""
    sys.exit(main(argv))

"""
Command-line job description: parsing of argv and key=value config files,
result rows and CSV output.
"""
import argparse
import logging
import math
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from Framework.Exceptions import ConfigError, NumericalError, ParameterDomainError, UsageError
from Framework.Optimizer import Objective
from Framework.ServiceDistribution import ServiceDistribution, parse_distribution
from Framework.Simulator import Model
from Framework.StatusServer import Scheme
from GlobalConfig import CSV_FLOAT_FORMAT, DEFAULT_BATCHES, DEFAULT_JOBS, DEFAULT_PACKETS, DEFAULT_SEED, results_file

logger = logging.getLogger(__name__)

COMMANDS = ('analytic', 'simulate', 'optimize', 'sweep', 'tradeoff')
SINGLE_POINT_COMMANDS = ('analytic', 'simulate')

CSV_COLUMNS = ['scheme', 'dist', 'lambda', 'eps_i', 'eps_b', 'avg_aoi', 'avg_peak_aoi', 'source', 'se_aoi',
               'se_peak']
OPTIMIZE_COLUMNS = ['scheme', 'dist', 'lambda', 'w1', 'w2', 'eps_i_star', 'eps_b_star', 'value_star',
                    'value_zero_wait', 'improvement', 'zero_wait_aoi', 'optimal_aoi']
TRUE_WORDS = ('1', 'true', 'yes', 'on')
FALSE_WORDS = ('0', 'false', 'no', 'off')


def parse_grid(token: str) -> tuple:
    """
    A single value, a comma list, "start:stop:count" (inclusive linear
    spacing) or "log:start:stop:count" (inclusive log spacing).
    """
    text = str(token).strip()
    try:
        if ':' in text:
            parts = text.split(':')
            log = parts[0].lower() == 'log'
            if log:
                parts = parts[1:]
            if len(parts) != 3:
                raise ValueError(text)
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1 or (log and (start <= 0 or stop <= 0)):
                raise ValueError(text)
            values = np.geomspace(start, stop, count) if log else np.linspace(start, stop, count)
        else:
            values = np.array([float(v) for v in text.split(',')])
    except ValueError:
        raise argparse.ArgumentTypeError('malformed value or grid {!r}'.format(token))
    if not np.all(np.isfinite(values)):
        raise argparse.ArgumentTypeError('non-finite value in {!r}'.format(token))
    return tuple(float(v) for v in values)


class JobArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# (flags, options); the long flag name doubles as the config-file key
OPTIONS = [
    (('--scheme',), dict(default='mg11', choices=[s.value for s in Scheme], help='packet management scheme')),
    (('--dist',), dict(help='service law: gamma:k=<f>,mu=<f> | invgauss:alpha=<f>,mu=<f> | exp:mu=<f> | det:c=<f>')),
    (('--lambda',), dict(dest='lam', type=parse_grid, help='arrival rate, value or grid')),
    (('--eps-i',), dict(type=parse_grid, help='wait after an idle period, value or grid (default 0)')),
    (('--eps-b',), dict(type=parse_grid, help='wait after a busy period, value or grid (mg12star only)')),
    (('--packets',), dict(type=int, help='packets per simulation run (default {})'.format(DEFAULT_PACKETS))),
    (('--seed',), dict(type=int, default=DEFAULT_SEED, help='master seed, 0 <= seed < 2^64')),
    (('--batches',), dict(type=int, default=DEFAULT_BATCHES, help='batches of the batch-means errors')),
    (('--w1',), dict(type=float, default=1.0, help='weight of the average AoI')),
    (('--w2',), dict(type=float, default=0.0, help='weight of the average peak AoI')),
    (('--out',), dict(help='output CSV (default {})'.format(results_file.format('<command>')))),
    (('--jobs',), dict(type=int, default=DEFAULT_JOBS, help='worker processes for grid points')),
    (('--model',), dict(default=Model.ORIGINAL.value, choices=[m.value for m in Model],
                        help='simulated model: discarding original or its no-discard equivalent')),
    (('--dump-trajectory',), dict(action='store_true', help='write the AoI event trace next to the output')),
    (('--verbose',), dict(action='store_true', help='debug logging')),
]


def build_parser() -> JobArgumentParser:
    parser = JobArgumentParser(prog='simulation.py',
                               description='Average AoI and peak AoI of waiting M/GI/1/1 and M/GI/1/2* servers.')
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--config', help='key=value file of defaults; command-line flags override it')
    for flags, options in OPTIONS:
        parser.add_argument(*flags, **options)
    return parser


def _config_keys() -> dict:
    keys = {}
    for flags, options in OPTIONS:
        name = flags[0].lstrip('-')
        keys[name] = (options.get('dest', name.replace('-', '_')), options.get('action') == 'store_true')
    return keys


def read_config(path) -> dict:
    """Parser defaults from a key=value file; '#' starts a comment."""
    keys = _config_keys()
    defaults = {}
    with open(path, encoding='utf-8') as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition('=')
            if not sep:
                raise UsageError('{}:{}: expected key=value'.format(path, number), token=line)
            name = key.strip().lstrip('-').replace('_', '-')
            if name not in keys:
                raise UsageError('{}:{}: unknown key'.format(path, number), token=key.strip())
            dest, is_flag = keys[name]
            value = value.strip()
            if is_flag:
                if value.lower() not in TRUE_WORDS + FALSE_WORDS:
                    raise UsageError('{}:{}: expected a boolean'.format(path, number), token=value)
                value = value.lower() in TRUE_WORDS
            defaults[dest] = value
    return defaults


@dataclass(frozen=True)
class JobSpec:
    command: str
    scheme: Scheme
    dist: ServiceDistribution
    lambdas: tuple
    eps_i: tuple
    eps_b: tuple
    objective: Objective
    packets: int = None
    seed: int = DEFAULT_SEED
    batches: int = DEFAULT_BATCHES
    out: str = None
    jobs: int = DEFAULT_JOBS
    model: Model = Model.ORIGINAL
    dump_trajectory: bool = False
    verbose: bool = False

    def grid(self) -> list:
        """(lambda, eps_i, eps_b) points in row order."""
        return [(lam, ei, eb) for lam in self.lambdas for ei in self.eps_i for eb in self.eps_b]


def parse_job(argv, config_path=None) -> JobSpec:
    argv = list(argv)
    locator = argparse.ArgumentParser(add_help=False)
    locator.add_argument('--config')
    known, _ = locator.parse_known_args(argv)
    parser = build_parser()
    path = known.config or config_path
    if path:
        parser.set_defaults(**read_config(path))
    ns = parser.parse_args(argv)

    try:
        scheme = Scheme(ns.scheme)
    except ValueError:
        raise UsageError('unknown scheme', token=ns.scheme)
    if ns.dist is None:
        raise UsageError('--dist is required')
    try:
        dist = parse_distribution(ns.dist)
    except ParameterDomainError as e:
        raise UsageError('malformed --dist: {}'.format(e), token=ns.dist)
    if ns.lam is None:
        raise UsageError('--lambda is required')
    if any(lam <= 0 for lam in ns.lam):
        raise UsageError('arrival rates must be > 0', token='--lambda')
    if scheme is Scheme.MG11 and ns.eps_b is not None:
        raise UsageError('--eps-b cannot be used with --scheme mg11', token='--eps-b')
    eps_i = ns.eps_i if ns.eps_i is not None else (0.0,)
    eps_b = ns.eps_b if ns.eps_b is not None else (0.0,)
    for flag, values in (('--eps-i', eps_i), ('--eps-b', eps_b)):
        if any(v < 0 for v in values):
            raise UsageError('waiting times must be >= 0', token=flag)
    if ns.command in SINGLE_POINT_COMMANDS and max(len(ns.lam), len(eps_i), len(eps_b)) > 1:
        raise UsageError('{} takes single values; use sweep for grids'.format(ns.command))
    if ns.command == 'tradeoff' and len(ns.lam) > 1:
        raise UsageError('tradeoff takes a single arrival rate', token='--lambda')
    if ns.dump_trajectory and ns.command != 'simulate':
        raise UsageError('--dump-trajectory only applies to simulate', token='--dump-trajectory')
    packets = ns.packets
    if packets is None and ns.command == 'simulate':
        packets = DEFAULT_PACKETS
    if packets is not None and packets < 1:
        raise UsageError('packet count must be positive', token=str(packets))
    if not 0 <= ns.seed < 2 ** 64:
        raise UsageError('seed must be an unsigned 64-bit integer', token=str(ns.seed))
    if ns.jobs < 1:
        raise UsageError('--jobs must be >= 1', token=str(ns.jobs))
    try:
        objective = Objective(ns.w1, ns.w2)
    except ParameterDomainError as e:
        raise UsageError(str(e), token='--w1/--w2')

    return JobSpec(command=ns.command, scheme=scheme, dist=dist, lambdas=ns.lam, eps_i=eps_i, eps_b=eps_b,
                   objective=objective, packets=packets, seed=ns.seed, batches=ns.batches,
                   out=ns.out or results_file.format(ns.command), jobs=ns.jobs, model=Model(ns.model),
                   dump_trajectory=ns.dump_trajectory, verbose=ns.verbose)


@dataclass(frozen=True)
class ResultRow:
    scheme: str
    dist: str
    lam: float
    eps_i: float
    eps_b: float
    avg_aoi: float
    avg_peak_aoi: float
    source: str  # 'analytic' or 'sim'
    se_aoi: float = None
    se_peak: float = None

    def __post_init__(self):
        for name in ('lam', 'eps_i', 'eps_b', 'avg_aoi', 'avg_peak_aoi', 'se_aoi', 'se_peak'):
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise NumericalError('{} = {} is not finite in the {} row at lambda={}, eps_i={}, eps_b={}'.format(
                    name, value, self.source, self.lam, self.eps_i, self.eps_b))

    def to_record(self) -> dict:
        return {'scheme': self.scheme, 'dist': self.dist, 'lambda': self.lam, 'eps_i': self.eps_i,
                'eps_b': self.eps_b, 'avg_aoi': self.avg_aoi, 'avg_peak_aoi': self.avg_peak_aoi,
                'source': self.source, 'se_aoi': self.se_aoi, 'se_peak': self.se_peak}


def write_frame(frame: pd.DataFrame, path):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, na_rep='', lineterminator='\n')
    logger.info('wrote %d rows to %s', len(frame), path)
    return path


def emit_csv(rows, path):
    if not rows:
        raise ConfigError('no result rows to write')
    frame = pd.DataFrame([r.to_record() for r in rows], columns=CSV_COLUMNS)
    return write_frame(frame, path)


def sibling_path(path, suffix) -> str:
    root, ext = os.path.splitext(path)
    return '{}.{}{}'.format(root, suffix, ext or '.csv')

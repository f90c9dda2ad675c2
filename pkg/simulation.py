"""
Command-line entry point:

    python simulation.py <analytic|simulate|optimize|sweep|tradeoff> --dist gamma:k=2,mu=1 --lambda 1 ...

Results go to a CSV file (results/<command>.csv unless --out is given).
Exit status: 0 on success, 2 on usage or configuration errors, 3 on
numerical failures, 4 on I/O errors.
"""
import logging
import multiprocessing as mp
import sys

import pandas as pd

import SimulationProcess
from Framework.Exceptions import ConfigError, NumericalError, ParameterDomainError, UsageError
from Framework.JobSpec import (OPTIMIZE_COLUMNS, JobSpec, ResultRow, emit_csv, parse_job, sibling_path,
                               write_frame)
from Framework.Optimizer import SweepConfig, tradeoff_curve
from Framework.ServiceDistribution import spec_string
from GlobalConfig import LOG_ENABLED, PRINT_ENABLED

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def configure_logging(verbose=False):
    if verbose:
        level = logging.DEBUG
    elif LOG_ENABLED or PRINT_ENABLED:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr)


def _map(func, args, jobs):
    # pool.map keeps the order of args
    if jobs > 1 and len(args) > 1:
        with mp.Pool(min(jobs, len(args))) as pool:
            return pool.map(func=func, iterable=args)
    return [func(a) for a in args]


def _point_args(spec: JobSpec) -> list:
    args = []
    for k, (lam, eps_i, eps_b) in enumerate(spec.grid()):
        if spec.command != 'simulate':
            args.append(('analytic', spec.scheme, spec.dist, lam, eps_i, eps_b))
        if spec.packets is not None:
            # independent but reproducible stream per grid point
            seed = spec.seed if spec.command == 'simulate' else (spec.seed, k)
            args.append(('sim', spec.scheme, spec.dist, lam, eps_i, eps_b, spec.packets, seed, spec.batches,
                         spec.model, spec.dump_trajectory))
    return args


def _run_points(spec: JobSpec) -> list:
    r_list = _map(SimulationProcess.run_helper, _point_args(spec), spec.jobs)
    files = [emit_csv([r['row'] for r in r_list], spec.out)]
    for r in r_list:
        if r['events'] is not None:
            files.append(write_frame(r['events'], sibling_path(spec.out, 'trajectory')))
    return files


def _run_optimize(spec: JobSpec) -> list:
    args = [(spec.scheme, spec.dist, lam, spec.objective) for lam in spec.lambdas]
    r_list = _map(SimulationProcess.optimize_helper, args, spec.jobs)
    for r in r_list:
        logger.info('lambda=%g: eps_i*=%.6g eps_b*=%.6g, improvement %.2f%%', r['lambda'], r['eps_i_star'],
                    r['eps_b_star'], 100 * r['improvement'])
    return [write_frame(pd.DataFrame(r_list, columns=OPTIMIZE_COLUMNS), spec.out)]


def _run_tradeoff(spec: JobSpec) -> list:
    lam = spec.lambdas[0]
    curve = tradeoff_curve(spec.scheme, spec.dist, lam, SweepConfig(eps_i=spec.eps_i, eps_b=spec.eps_b))

    def rows(frame):
        return [ResultRow(spec.scheme.value, spec_string(spec.dist), lam, p.eps_i, p.eps_b, p.avg_aoi,
                          p.avg_peak_aoi, 'analytic') for p in frame.itertuples(index=False)]

    logger.info('%d of %d points on the Pareto front', len(curve.pareto), len(curve.points))
    return [emit_csv(rows(curve.points), spec.out), emit_csv(rows(curve.pareto), sibling_path(spec.out, 'pareto'))]


def run_job(spec: JobSpec) -> (int, list):
    """Execute a parsed job; returns the exit status and the files written."""
    try:
        if spec.command == 'optimize':
            files = _run_optimize(spec)
        elif spec.command == 'tradeoff':
            files = _run_tradeoff(spec)
        else:
            files = _run_points(spec)
    except (ConfigError, ParameterDomainError) as e:
        logger.error('%s job (%s, %s): %s', spec.command, spec.scheme.value, spec.dist, e)
        return EXIT_USAGE, []
    except NumericalError as e:
        logger.error('%s job (%s, %s): numerical failure: %s', spec.command, spec.scheme.value, spec.dist, e)
        return EXIT_NUMERICAL, []
    except OSError as e:
        logger.error('%s job: cannot write results: %s', spec.command, e)
        return EXIT_IO, []
    return EXIT_OK, files


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        spec = parse_job(argv)
    except UsageError as e:
        configure_logging()
        logger.error('usage: %s', e)
        return EXIT_USAGE
    except OSError as e:
        configure_logging()
        logger.error('cannot read config: %s', e)
        return EXIT_IO
    configure_logging(spec.verbose)
    status, files = run_job(spec)
    for path in files:
        logger.info('results written to %s', path)
    return status


if __name__ == '__main__':
    sys.exit(main())

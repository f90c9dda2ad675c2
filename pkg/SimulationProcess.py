import logging

from Framework.AnalyticMG11 import QueueConfig11, aoi_metrics_11
from Framework.AnalyticMG12Star import QueueConfig2s, aoi_metrics_2s
from Framework.JobSpec import OPTIMIZE_COLUMNS, ResultRow
from Framework.Optimizer import improvement_report
from Framework.ServiceDistribution import spec_string
from Framework.Simulator import Model, SimConfig, simulate_run
from Framework.StatusServer import Scheme

logger = logging.getLogger(__name__)


def run_helper(args):
    return run(*args)


def run(source, scheme, dist, lam, eps_i, eps_b, packets=None, seed=None, batches=None, model=Model.ORIGINAL,
        dump_trajectory=False):
    """
    One grid point, evaluated analytically (source='analytic') or by a
    simulation run (source='sim').
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.MG11:
        eps_b = 0.0
    if source == 'analytic':
        if scheme is Scheme.MG11:
            m = aoi_metrics_11(QueueConfig11(lam, eps_i, dist))
        else:
            m = aoi_metrics_2s(QueueConfig2s(lam, eps_i, eps_b, dist))
        row = ResultRow(scheme.value, spec_string(dist), lam, eps_i, eps_b, m.avg_aoi, m.avg_peak_aoi, 'analytic')
        return {'row': row, 'events': None}

    cfg = SimConfig(scheme, Model(model), lam, eps_i, eps_b, dist, n_packets=packets, seed=seed, n_batches=batches,
                    dump_trajectory=dump_trajectory)
    result = simulate_run(cfg)
    logger.debug('simulated %s lambda=%g eps_i=%g eps_b=%g: %d deliveries, %d discarded',
                 scheme.value, lam, eps_i, eps_b, result.deliveries, result.discarded)
    row = ResultRow(scheme.value, spec_string(dist), lam, eps_i, eps_b, result.avg_aoi, result.avg_peak_aoi, 'sim',
                    se_aoi=result.se_aoi, se_peak=result.se_peak)
    return {'row': row, 'events': result.events}


def optimize_helper(args):
    return optimize(*args)


def optimize(scheme, dist, lam, objective, search_cfg=None):
    kwargs = {} if search_cfg is None else {'search_cfg': search_cfg}
    report = improvement_report(scheme, dist, [lam], objective, **kwargs).iloc[0]
    row = {'scheme': Scheme(scheme).value, 'dist': spec_string(dist), 'lambda': lam,
           'w1': objective.w1, 'w2': objective.w2}
    for column in OPTIMIZE_COLUMNS[5:]:
        row[column] = float(report[column])
    return row

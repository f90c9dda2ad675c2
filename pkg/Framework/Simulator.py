"""
Packet-level simulation of the waiting servers, on a simpy event loop.

Arrivals and service times come from two numpy streams spawned from one
master seed, so the discarding model and its no-discard equivalent can be
run on exactly the same sample path.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import pandas as pd
import simpy

from Framework.AnalyticMG11 import check_rate_and_waits
from Framework.Exceptions import ConfigError
from Framework.Receiver import Receiver
from Framework.ServiceDistribution import ServiceDistribution, VariateStream
from Framework.Statistics import batch_bounds, batch_ci
from Framework.StatusServer import EquivalentServer, Scheme, StatusServer, state_labels
from Framework.UpdatePacket import UpdatePacket
from GlobalConfig import DEFAULT_BATCHES, DEFAULT_PACKETS, DEFAULT_SEED, LOG_ENABLED, MIN_BATCHES, MIN_PACKETS

logger = logging.getLogger(__name__)


class Model(Enum):
    ORIGINAL = 'original'
    EQUIVALENT = 'equivalent'


@dataclass(frozen=True)
class SimConfig:
    scheme: Scheme
    model: Model
    lam: float
    eps_i: float
    eps_b: float
    dist: ServiceDistribution
    n_packets: int = DEFAULT_PACKETS
    seed: int = DEFAULT_SEED
    n_batches: int = DEFAULT_BATCHES
    dump_trajectory: bool = False

    def __post_init__(self):
        check_rate_and_waits(self.lam, eps_i=self.eps_i, eps_b=self.eps_b)
        if self.n_packets < MIN_PACKETS:
            raise ConfigError('n_packets = {} is below the minimum of {}'.format(self.n_packets, MIN_PACKETS))
        if self.n_batches < MIN_BATCHES:
            raise ConfigError('n_batches = {} is below the minimum of {}'.format(self.n_batches, MIN_BATCHES))
        if self.scheme is Scheme.MG11 and self.eps_b != 0:
            logger.debug('eps_b = %g ignored by the M/GI/1/1 scheme', self.eps_b)


@dataclass
class SimResult:
    avg_aoi: float
    avg_peak_aoi: float
    se_aoi: float
    se_peak: float
    deliveries: int
    discarded: int
    occupancy: dict
    horizon: float
    arrivals: int = 0
    served_packets: int = 0
    in_flight: int = 0
    # no-discard model only: lam_hat * (mean XT + mean X^2/2) and mean XT per arrival state
    aoi_from_xt: float = math.nan
    xt_by_state: dict = field(default_factory=dict)
    occupancy_table: pd.DataFrame = None
    trajectory: pd.DataFrame = None
    events: pd.DataFrame = None
    # per-component counters: server arrivals, discards and time per state, receiver deliveries
    component_data: pd.Series = None


def source(env, server: StatusServer, n_packets: int, interarrivals: VariateStream):
    for packet_id in range(n_packets):
        x = next(interarrivals)
        yield env.timeout(x)
        server.packet_arrived(UpdatePacket(packet_id, env.now, interarrival=x if packet_id else None))


def _occupancy_table(server: StatusServer, labels: dict, n_batches: int, arrival_times) -> pd.DataFrame:
    """
    Per-batch time fractions and arrival-seen fractions of every state.

    Batch b covers the arrivals with indices in [bounds[b], bounds[b+1]) and
    the time between the first of them and the first arrival of batch b+1
    (the run horizon for the last batch).
    """
    starts = np.asarray(server.state_changes['time'])
    visited = np.asarray([labels[s] for s in server.state_changes['val']])
    horizon = server.env.now
    durations = np.diff(np.append(starts, horizon))
    seen = np.asarray([labels[s] for s in server.arrivals_seen])

    bounds = batch_bounds(len(arrival_times), n_batches)
    edges = np.append(arrival_times[bounds[:-1]], horizon)
    window = np.diff(edges)
    idx = np.searchsorted(starts, edges, side='right') - 1

    rows = {}
    for label in labels.values():
        in_state = visited == label
        cumulative = np.concatenate(([0.0], np.cumsum(durations * in_state)))
        elapsed = cumulative[idx] + (edges - starts[idx]) * in_state[idx]
        time_frac = np.diff(elapsed) / window
        arrival_frac = np.asarray([np.mean(seen[lo:hi] == label) for lo, hi in zip(bounds[:-1], bounds[1:])])
        time_mean, time_se = batch_ci(time_frac)
        arrival_mean, arrival_se = batch_ci(arrival_frac)
        diff_mean, diff_se = batch_ci(arrival_frac - time_frac)
        rows[label] = {'time_fraction': time_mean, 'time_se': time_se,
                       'arrival_fraction': arrival_mean, 'arrival_se': arrival_se,
                       'difference': diff_mean, 'difference_se': diff_se}
    table = pd.DataFrame.from_dict(rows, orient='index')
    table.index.name = 'state'
    return table


def simulate_run(cfg: SimConfig) -> SimResult:
    """Run one replication; the same cfg always yields the same result."""
    arrival_seed, service_seed = np.random.SeedSequence(cfg.seed).spawn(2)
    interarrivals = VariateStream.interarrivals(cfg.lam, np.random.default_rng(arrival_seed))
    services = VariateStream.services(cfg.dist, np.random.default_rng(service_seed))

    sim_env = simpy.Environment()
    equivalent = cfg.model is Model.EQUIVALENT
    receiver = Receiver(sim_env, record_packets=equivalent, dump_events=cfg.dump_trajectory)
    server_class = EquivalentServer if equivalent else StatusServer
    server = server_class(sim_env, cfg.scheme, cfg.eps_i, cfg.eps_b, services, receiver)
    sim_env.process(server.run())
    arrivals = sim_env.process(source(sim_env, server, cfg.n_packets, interarrivals))
    sim_env.run(until=arrivals)
    server.finish()

    # Simulation is done.
    # process data
    if LOG_ENABLED:
        server.log()
        receiver.log()

    labels = state_labels(cfg.scheme)
    stats = receiver.aoi_statistics(cfg.n_batches)
    horizon = sim_env.now
    occupancy = {labels[s]: server.time_in_state[s] / horizon for s in labels}
    result = SimResult(avg_aoi=stats['avg_aoi'], avg_peak_aoi=stats['avg_peak_aoi'],
                       se_aoi=stats['se_aoi'], se_peak=stats['se_peak'],
                       deliveries=len(receiver.delivery_times), discarded=server.num_discarded,
                       occupancy=occupancy, horizon=horizon, arrivals=server.num_arrivals,
                       served_packets=server.served_packets(), in_flight=server.in_flight(),
                       trajectory=receiver.trajectory())
    result.component_data = pd.concat([server.get_simulation_data(), receiver.get_simulation_data()])
    result.occupancy_table = _occupancy_table(server, labels, cfg.n_batches, np.asarray(server.arrival_times))
    if equivalent:
        result.aoi_from_xt, result.xt_by_state = receiver.packet_statistics(labels)
    if cfg.dump_trajectory:
        result.events = receiver.event_trace()
    return result


def simulate_equivalent(cfg: SimConfig) -> SimResult:
    return simulate_run(replace(cfg, model=Model.EQUIVALENT))


def empirical_occupancy(cfg: SimConfig) -> pd.DataFrame:
    """
    Time-average and arrival-seen state fractions with batch-means errors.

    By PASTA the two columns agree; `difference_se` is the error of their
    per-batch difference.
    """
    return simulate_run(cfg).occupancy_table


def get_simulation_data(result: SimResult, name) -> pd.Series:
    series = pd.Series({
        'AvgAoI': result.avg_aoi,
        'SeAoI': result.se_aoi,
        'AvgPeakAoI': result.avg_peak_aoi,
        'SePeak': result.se_peak,
        'Horizon': result.horizon,
    })
    if result.component_data is not None:
        series = pd.concat([series, result.component_data])
    series.name = name
    return series

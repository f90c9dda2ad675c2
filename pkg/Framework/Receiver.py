import logging
import math

import numpy as np
import pandas as pd

from Framework.Exceptions import ConfigError
from Framework.Statistics import batch_bounds, batch_ci

logger = logging.getLogger(__name__)


class Receiver:
    """
    Monitor at the far end of the server: tracks u(t), the generation time of
    the freshest delivered update, and with it the AoI sawtooth
    D(t) = t - u(t).
    """

    def __init__(self, env, record_packets=False, dump_events=False):
        self.env = env
        self.delivery_times = []
        self.generation_times = []
        self.num_packets_received = 0
        self.record_packets = record_packets
        # per served packet of the no-discard model: interarrival X, system time T, state seen by the previous arrival
        self.packet_x = []
        self.packet_t = []
        self.packet_state = []
        self.dump_events = dump_events
        self.events = {'t_event': [], 'event_type': [], 'delta_before': [], 'delta_after': []}

    def age(self, now) -> float:
        if not self.generation_times:
            return math.nan
        return now - self.generation_times[-1]

    def log_event(self, now, event_type, delta_after=None):
        if not self.dump_events:
            return
        before = self.age(now)
        self.events['t_event'].append(now)
        self.events['event_type'].append(event_type)
        self.events['delta_before'].append(before)
        self.events['delta_after'].append(before if delta_after is None else delta_after)

    def packet_received(self, packets: list, now):
        """A service completed at `now`, delivering every packet in `packets` at once."""
        generation = max(p.arrival_time for p in packets)
        self.log_event(now, 'delivery', delta_after=now - generation)
        self.delivery_times.append(now)
        self.generation_times.append(generation)
        self.num_packets_received += len(packets)
        for p in packets:
            p.departure_time = now
            if self.record_packets and p.interarrival is not None:
                self.packet_x.append(p.interarrival)
                self.packet_t.append(p.system_time)
                self.packet_state.append(p.previous_state)

    def trajectory(self) -> pd.DataFrame:
        return pd.DataFrame({'delivery_time': self.delivery_times, 'generation_time': self.generation_times})

    def event_trace(self) -> pd.DataFrame:
        return pd.DataFrame(self.events)

    def aoi_statistics(self, n_batches: int) -> dict:
        """
        Time-average AoI and delivery-average peak AoI with batch-means errors.

        Between deliveries k-1 and k the AoI rises with slope one from
        d[k-1] - g[k-1] to d[k] - g[k-1] (the peak of delivery k); the
        time integral is the sum of these trapezoids.
        """
        if len(self.delivery_times) < n_batches + 1:
            raise ConfigError('only {} deliveries in the run, at least {} are needed for {} batches; '
                              'increase the packet count'.format(len(self.delivery_times), n_batches + 1, n_batches))
        d = np.asarray(self.delivery_times)
        g = np.asarray(self.generation_times)
        dt = np.diff(d)
        start = d[:-1] - g[:-1]
        peaks = d[1:] - g[:-1]
        areas = dt * (start + peaks) / 2.0

        bounds = batch_bounds(len(dt), n_batches)
        batch_aoi, batch_peak = [], []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            batch_aoi.append(math.fsum(areas[lo:hi]) / (d[hi] - d[lo]))
            batch_peak.append(math.fsum(peaks[lo:hi]) / (hi - lo))
        _, se_aoi = batch_ci(batch_aoi)
        _, se_peak = batch_ci(batch_peak)
        return {
            'avg_aoi': math.fsum(areas) / (d[-1] - d[0]),
            'avg_peak_aoi': math.fsum(peaks) / len(peaks),
            'se_aoi': se_aoi,
            'se_peak': se_peak,
            'area': math.fsum(areas),
        }

    def packet_statistics(self, labels: dict) -> (float, dict):
        """
        lam_hat * (mean X T + mean X^2 / 2) over served packets, and the mean
        of X T per state found by the previous arrival.
        """
        if not self.packet_x:
            return math.nan, {}
        x = np.asarray(self.packet_x)
        t = np.asarray(self.packet_t)
        xt = x * t
        aoi = (np.mean(xt) + np.mean(x * x) / 2.0) / np.mean(x)
        states = np.asarray([labels[s] for s in self.packet_state])
        by_state = {label: float(np.mean(xt[states == label])) for label in np.unique(states)}
        return float(aoi), by_state

    def log(self):
        logger.info('receiver: %d deliveries, %d packets', len(self.delivery_times), self.num_packets_received)

    def get_simulation_data(self) -> pd.Series:
        return pd.Series({
            'Deliveries': len(self.delivery_times),
            'PacketsReceived': self.num_packets_received,
            'LastDelivery': self.delivery_times[-1] if self.delivery_times else math.nan,
        })

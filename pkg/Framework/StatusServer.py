import logging
from enum import Enum, auto

import pandas as pd

from Framework.Receiver import Receiver
from Framework.UpdatePacket import UpdatePacket

logger = logging.getLogger(__name__)


class Scheme(Enum):
    MG11 = 'mg11'
    MG12STAR = 'mg12star'


class ServerState(Enum):
    IDLE = auto()
    WAIT_IDLE = auto()
    BUSY = auto()
    WAIT_BUSY = auto()


def state_labels(scheme: Scheme) -> dict:
    if scheme is Scheme.MG11:
        return {ServerState.IDLE: 'I', ServerState.WAIT_IDLE: 'W', ServerState.BUSY: 'B'}
    return {ServerState.IDLE: 'I', ServerState.WAIT_IDLE: 'WaI', ServerState.BUSY: 'B',
            ServerState.WAIT_BUSY: 'WaB'}


class StatusServer:
    """
    Single server with deterministic waiting before service, discarding
    model: at most one packet is captured for the next service and a newer
    arrival always replaces it (latest wins).

    M/GI/1/1: arrivals during a service are dropped.
    M/GI/1/2*: arrivals during a service go to the single buffer slot; if
    the slot is occupied when the service ends the server waits eps_b and
    then serves the freshest packet.
    """

    def __init__(self, env, scheme: Scheme, eps_i, eps_b, services, receiver: Receiver):
        self.env = env
        self.scheme = scheme
        self.eps_i = eps_i
        self.eps_b = eps_b if scheme is Scheme.MG12STAR else 0.0
        self.services = services
        self.receiver = receiver

        self.current_state = ServerState.IDLE
        self.start_state_time = self.env.now
        self.time_in_state = {s: 0.0 for s in ServerState}
        self.state_changes = {'time': [self.env.now], 'val': [ServerState.IDLE]}
        self.arrivals_seen = []
        self.arrival_times = []
        self.wake = self.env.event()

        self.head = None
        self.buffer = None
        self.in_service = []

        self.num_arrivals = 0
        self.num_discarded = 0
        self.num_services = 0

    # --- admission of a new arrival, by state -----------------------------

    def packet_arrived(self, packet: UpdatePacket):
        self.num_arrivals += 1
        packet.previous_state = self.arrivals_seen[-1] if self.arrivals_seen else None
        self.arrivals_seen.append(self.current_state)
        self.arrival_times.append(self.env.now)
        self.receiver.log_event(self.env.now, 'arrival')
        if self.current_state is ServerState.IDLE:
            self.admit_idle(packet)
            self.change_state(ServerState.WAIT_IDLE)
            self.wake.succeed()
        elif self.current_state is ServerState.BUSY:
            self.admit_busy(packet)
        else:
            self.admit_waiting(packet)

    def discard(self, packet: UpdatePacket):
        packet.discarded = True
        self.num_discarded += 1
        self.receiver.log_event(self.env.now, 'discard')

    def admit_idle(self, packet):
        self.head = packet

    def admit_waiting(self, packet):
        self.discard(self.head)
        self.head = packet

    def admit_busy(self, packet):
        if self.scheme is Scheme.MG11:
            self.discard(packet)
            return
        if self.buffer is not None:
            self.discard(self.buffer)
        self.buffer = packet

    # --- service --------------------------------------------------------------

    def take_for_service(self) -> list:
        served, self.head = [self.head], None
        return served

    def has_backlog(self) -> bool:
        return self.buffer is not None

    def promote_backlog(self):
        self.head, self.buffer = self.buffer, None

    def run(self):
        while True:
            if self.current_state is ServerState.IDLE:
                self.wake = self.env.event()
                yield self.wake
            # the first capture of a cycle has moved the server to WAIT_IDLE
            yield self.env.timeout(self.eps_i)
            self.receiver.log_event(self.env.now, 'wait_expiry')
            while True:
                served = self.in_service = self.take_for_service()
                self.change_state(ServerState.BUSY)
                self.num_services += 1
                yield self.env.timeout(next(self.services))
                self.receiver.packet_received(served, self.env.now)
                self.in_service = []
                if self.scheme is Scheme.MG12STAR and self.has_backlog():
                    self.promote_backlog()
                    self.change_state(ServerState.WAIT_BUSY)
                    yield self.env.timeout(self.eps_b)
                    self.receiver.log_event(self.env.now, 'wait_expiry')
                else:
                    self.change_state(ServerState.IDLE)
                    break

    # --- bookkeeping ----------------------------------------------------------

    def change_state(self, new_state: ServerState):
        if self.current_state == new_state:
            raise ValueError('You can not change state ({}) when the states are the same'.format(new_state.name))
        now = self.env.now
        self.time_in_state[self.current_state] += now - self.start_state_time
        self.start_state_time = now
        self.state_changes['time'].append(now)
        self.state_changes['val'].append(new_state)
        self.current_state = new_state

    def finish(self):
        """Close the accounting of the state the run ends in."""
        now = self.env.now
        self.time_in_state[self.current_state] += now - self.start_state_time
        self.start_state_time = now

    def in_flight(self) -> int:
        return len(self.in_service) + int(self.head is not None) + int(self.buffer is not None)

    def served_packets(self) -> int:
        return self.receiver.num_packets_received

    def log(self):
        logger.info('---------- %s server (%s) ----------', self.scheme.value, type(self).__name__)
        logger.info('\t arrivals %d, services %d, discarded %d, in flight %d',
                    self.num_arrivals, self.num_services, self.num_discarded, self.in_flight())
        for state, t in self.time_in_state.items():
            logger.info('\t time in %s: %.6g', state.name, t)

    def get_simulation_data(self) -> pd.Series:
        series = {
            'Arrivals': self.num_arrivals,
            'Services': self.num_services,
            'Discarded': self.num_discarded,
            'InFlight': self.in_flight(),
        }
        for state, t in self.time_in_state.items():
            series['Time' + state.name] = t
        return pd.Series(series)


class EquivalentServer(StatusServer):
    """
    The no-discard reformulation: every packet is kept and all packets
    captured for one service depart together. Packets arriving during a
    service are held; in M/GI/1/1 they join the group opened by the next
    idle arrival, in M/GI/1/2* they form the group served after eps_b.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.group = []
        self.held = []

    def admit_idle(self, packet):
        self.group = self.held + [packet]
        self.held = []

    def admit_waiting(self, packet):
        self.group.append(packet)

    def admit_busy(self, packet):
        self.held.append(packet)

    def take_for_service(self) -> list:
        served, self.group = self.group, []
        return served

    def has_backlog(self) -> bool:
        return bool(self.held)

    def promote_backlog(self):
        self.group, self.held = self.held, []

    def in_flight(self) -> int:
        return len(self.in_service) + len(self.group) + len(self.held)

class UpdatePacket:
    """A status update: generated (and arriving) at `arrival_time`, identified by its arrival index."""

    def __init__(self, packet_id: int, arrival_time: float, interarrival: float = None):
        self.id = packet_id
        self.arrival_time = arrival_time
        # state found by the update that arrived just before this one
        self.previous_state = None
        self.interarrival = interarrival
        self.departure_time = None
        self.discarded = False

    @property
    def system_time(self):
        if self.departure_time is None:
            return None
        return self.departure_time - self.arrival_time

    def __repr__(self):
        return 'UpdatePacket({}, t={:.6g})'.format(self.id, self.arrival_time)

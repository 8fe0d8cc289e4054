"""One TTL-bounded broadcast: synchronous hops, forward-once, contention loss, blocking."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from surfsim.config import ScenarioConfig
from surfsim.occupancy import PrEnvironment
from surfsim.strategies import Strategy
from surfsim.topology import Message, Topology

LOSS_FLOOR = 0.01


def loss_probability(available_slots: int, contenders: int) -> float:
    """Per-receiver loss on a channel with ``available_slots`` free slots.

    Flat 1% while contenders < slots, otherwise 1 - slots/contenders. The
    rule is discontinuous: 5 contenders on 6 slots lose 1%, 6 lose nothing.
    """
    if available_slots < 0:
        raise ValueError("available_slots must be nonnegative")
    if available_slots == 0:
        return 1.0
    if contenders < available_slots:
        return LOSS_FLOOR
    return min(1.0, max(0.0, 1.0 - available_slots / contenders))


@dataclass
class Transmission:
    node: int
    channel: int
    cr_neighbors: int
    available_slots: int
    # non-transmitting neighbors tuned to the channel, informed ones included
    overhearing: int
    # uninformed tuned neighbors: the ones that actually attempt reception
    tuned: int
    successes: int
    losses: int

    @property
    def blocked(self) -> bool:
        return self.overhearing == 0


@dataclass
class HopRecord:
    hop: int
    transmissions: list[Transmission] = field(default_factory=list)

    @property
    def blocked(self) -> bool:
        """Every transmitter of the hop went unheard."""
        return bool(self.transmissions) and all(t.blocked for t in self.transmissions)


@dataclass
class RunTrace:
    message: Message
    hops: list[HopRecord]
    # hop at which each node first held the message; -1 if never
    first_reception: np.ndarray

    @property
    def source(self) -> int:
        return self.message.source

    @property
    def ttl_initial(self) -> int:
        return self.message.ttl_initial

    @property
    def blocked(self) -> bool:
        return any(h.blocked for h in self.hops)

    @property
    def transmissions(self) -> int:
        return sum(len(h.transmissions) for h in self.hops)

    @property
    def receptions(self) -> int:
        return sum(t.successes for h in self.hops for t in h.transmissions)

    @property
    def losses(self) -> int:
        return sum(t.losses for h in self.hops for t in h.transmissions)

    @property
    def blocked_events(self) -> int:
        return sum(t.blocked for h in self.hops for t in h.transmissions)

    def received(self) -> np.ndarray:
        return self.first_reception >= 0

    def totals(self) -> dict:
        return {"tx": self.transmissions, "rx": self.receptions,
                "loss": self.losses, "blocked": self.blocked_events}


def run_dissemination(topology: Topology, strategy: Strategy, pr_env: PrEnvironment,
                      config: ScenarioConfig, rng: np.random.Generator,
                      source: int | None = None, message_id: int = 0) -> RunTrace:
    """Flood one message from ``source`` (uniformly random if None).

    Per hop: resample PR activity, let every node decide its channel, then
    each holder (in id order) sends once; uninformed neighbors tuned to its
    channel each receive independently. Nobody retransmits.
    """
    n = topology.num_nodes
    ttl = config.hop_budget
    if source is None:
        source = int(rng.integers(n))
    topology._check_node(source)
    first = np.full(n, -1, dtype=np.int64)
    first[source] = 0
    holders = np.zeros(n, dtype=bool)
    holders[source] = True
    hops: list[HopRecord] = []
    nbr_lists = topology.neighbor_lists
    counts = topology.cr_counts

    for hop in range(1, ttl + 1):
        if not holders.any():
            break
        state = pr_env.sample(rng)
        channel, tuned = strategy.hop_decisions(state, hop - 1, holders, rng)
        record = HopRecord(hop)
        next_holders = np.zeros(n, dtype=bool)
        for u in np.flatnonzero(holders):
            c = int(channel[u])
            nb = nbr_lists[u]
            over = nb[tuned[nb, c]]
            listeners = over[first[over] < 0]
            crn = int(counts[u, c])
            slots = int(state.total_slots - state.occupied_slots[c])
            ok = rng.random(listeners.size) >= loss_probability(slots, crn)
            winners = listeners[ok]
            first[winners] = hop
            next_holders[winners] = True
            record.transmissions.append(Transmission(
                int(u), c, crn, slots, int(over.size), int(listeners.size),
                int(winners.size), int(listeners.size - winners.size)))
        hops.append(record)
        holders = next_holders

    return RunTrace(Message(message_id, source, ttl), hops, first)


def trace_rows(trace: RunTrace, run: int = 0):
    for h in trace.hops:
        for t in h.transmissions:
            yield (run, h.hop, t.node, t.channel, t.cr_neighbors, t.tuned,
                   t.successes, t.losses, int(t.blocked))


TRACE_COLUMNS = ("run", "hop", "tx_node", "channel", "cr_n", "tuned",
                 "successes", "losses", "blocked")


def traces_to_csv(traces) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(TRACE_COLUMNS)
    for run, trace in enumerate(traces):
        out.writerows(trace_rows(trace, run))
    return buf.getvalue()

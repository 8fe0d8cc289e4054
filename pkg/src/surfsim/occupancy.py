"""PR occupancy, CR available space and the tenancy-weighted CR occupancy."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from surfsim.config import ScenarioConfig
from surfsim.topology import Topology, pr_round_robin


@dataclass(frozen=True)
class ChannelView:
    channel: int
    pr_occupancy: float
    available_space: float
    available_slots: int
    cr_neighbors: int
    cr_occupancy: float
    weight: float


def pr_occupancy(occupied_slots: int, total_slots: int) -> float:
    if not 0 <= occupied_slots <= total_slots:
        raise ValueError(f"occupied slots {occupied_slots} outside [0, {total_slots}]")
    return occupied_slots / total_slots


def cr_occupancy(available_space: float, cr_neighbors: int, beta: float) -> float:
    """Peaks (at ``available_space``) when the channel has beta or beta-1 CR neighbors."""
    if cr_neighbors < beta:
        return available_space / (beta - cr_neighbors)
    if cr_neighbors == beta:
        return available_space
    return available_space / cr_neighbors


def cr_occupancy_array(available_space, cr_neighbors, beta):
    """Elementwise :func:`cr_occupancy`; bit-identical to the scalar form."""
    space = np.asarray(available_space, dtype=float)
    n = np.asarray(cr_neighbors)
    below = n < beta
    above = n > beta
    # Safe divisors: each branch only reads its own lanes.
    div_below = np.where(below, beta - n, 1)
    div_above = np.where(above, n, 1)
    out = np.where(below, space / div_below, space)
    return np.where(above, space / div_above, out)


@dataclass
class PrActivityState:
    """Per-channel occupied slots for the current hop.

    ``on_probability`` is set in dynamic mode only: one value per PR node,
    drawn once per run.
    """

    occupied_slots: np.ndarray
    total_slots: int
    on_probability: np.ndarray | None = None

    @property
    def pr_fraction(self) -> np.ndarray:
        return self.occupied_slots / self.total_slots


class PrEnvironment:
    """PR activity for one run. ``sample`` is called once per hop."""

    def __init__(self, config: ScenarioConfig, topology: Topology, rng: np.random.Generator):
        self.model = config.pr_model
        self.total_slots = config.total_slots
        self.num_channels = topology.num_channels
        self.fixed_slots = config.pr_slots
        self.pr_channel = pr_round_robin(int(topology.pr_per_channel.sum()), self.num_channels)
        self.on_probability = None
        if self.model == "dynamic":
            self.on_probability = rng.uniform(config.pr_on_low, config.pr_on_high,
                                              size=self.pr_channel.size)

    def sample(self, rng: np.random.Generator) -> PrActivityState:
        if self.model == "fixed":
            slots = np.full(self.num_channels, self.fixed_slots, dtype=np.int64)
        else:
            on = rng.random(self.pr_channel.size) < self.on_probability
            slots = np.bincount(self.pr_channel[on], minlength=self.num_channels)
            slots = np.minimum(slots, self.total_slots)
        return PrActivityState(slots, self.total_slots, self.on_probability)


def sample_pr_state(config: ScenarioConfig, topology: Topology,
                    rng: np.random.Generator) -> PrActivityState:
    """One-shot draw (fresh ON probabilities included); runs use :class:`PrEnvironment`."""
    return PrEnvironment(config, topology, rng).sample(rng)


def build_channel_views(topology: Topology, node: int, pr_state: PrActivityState,
                        beta: float) -> list[ChannelView]:
    from surfsim.strategies import surf_weight

    topology._check_node(node)
    views = []
    for channel in topology.acs[node]:
        channel = int(channel)
        occupied = int(pr_state.occupied_slots[channel])
        pr_o = pr_occupancy(occupied, pr_state.total_slots)
        space = 1.0 - pr_o
        crn = int(topology.cr_counts[node, channel])
        cro = cr_occupancy(space, crn, beta)
        views.append(ChannelView(channel, pr_o, space, pr_state.total_slots - occupied,
                                 crn, cro, surf_weight(pr_o, cro)))
    return views


def views_to_csv(rows) -> str:
    """``rows`` is an iterable of (node, ChannelView)."""
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["node", "channel", "pr_o", "cr_as", "cr_n", "cr_o", "p_w"])
    for node, v in rows:
        out.writerow([node, v.channel, repr(v.pr_occupancy), repr(v.available_space),
                      v.cr_neighbors, repr(v.cr_occupancy), repr(v.weight)])
    return buf.getvalue()


def weight_matrix(topology: Topology, pr_fraction: np.ndarray, beta: float) -> np.ndarray:
    """SURF weights for every (node, channel); -inf outside each node's Acs."""
    space = 1.0 - pr_fraction
    cro = cr_occupancy_array(space[None, :], topology.cr_counts, beta)
    # math.exp, not np.exp, so weights tie exactly as the scalar path does
    decay = np.array([math.exp(-p) for p in pr_fraction.tolist()])
    w = decay[None, :] * cro
    return np.where(topology.acs_mask, w, -math.inf)

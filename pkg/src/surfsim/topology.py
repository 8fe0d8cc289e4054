"""The static simulation world: CR placement, unit-disk links, Acs sets, PRs per channel."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from surfsim.config import ScenarioConfig


def ttl_for(area_side: float, tx_range: float) -> int:
    """Hop budget needed to cross the square diagonal-ish: ceil(2a / R)."""
    if area_side <= 0 or tx_range <= 0:
        raise ValueError("area_side and tx_range must be positive")
    return math.ceil(2 * area_side / tx_range)


@dataclass(eq=False)
class Topology:
    """Immutable after construction; share freely between runs.

    ``acs`` holds each node's accessible channels as a sorted row of a
    ``(N, acs_size)`` array, ``acs_mask`` the same as an ``(N, C)`` boolean.
    """

    positions: np.ndarray
    adjacency: np.ndarray
    acs: np.ndarray
    num_channels: int
    pr_per_channel: np.ndarray
    acs_mask: np.ndarray = field(init=False)
    neighbor_lists: tuple = field(init=False)
    # cr_counts[u, c]: neighbors of u that can access channel c
    cr_counts: np.ndarray = field(init=False)

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.shape[0] != adj.shape[1] or not (adj == adj.T).all() or adj.diagonal().any():
            raise ValueError("adjacency must be square, symmetric and irreflexive")
        acs = np.sort(np.asarray(self.acs, dtype=np.int64), axis=1)
        if acs.shape[0] != adj.shape[0]:
            raise ValueError("one Acs row per node required")
        if acs.size and (acs.min() < 0 or acs.max() >= self.num_channels):
            raise ValueError("Acs channel out of range")
        if (np.diff(acs, axis=1) == 0).any():
            raise ValueError("Acs channels must be distinct")
        mask = np.zeros((adj.shape[0], self.num_channels), dtype=bool)
        np.put_along_axis(mask, acs, True, axis=1)
        self.adjacency = adj
        self.acs = acs
        self.acs_mask = mask
        self.pr_per_channel = np.asarray(self.pr_per_channel, dtype=np.int64)
        self.neighbor_lists = tuple(np.flatnonzero(row) for row in adj)
        self.cr_counts = adj.astype(np.int64) @ mask.astype(np.int64)
        for arr in (self.positions, self.adjacency, self.acs, self.acs_mask, self.cr_counts):
            if isinstance(arr, np.ndarray):
                arr.flags.writeable = False

    @property
    def num_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def acs_size(self) -> int:
        return self.acs.shape[1]

    def neighbors(self, node: int) -> np.ndarray:
        self._check_node(node)
        return self.neighbor_lists[node]

    def degree(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def _check_node(self, node: int) -> None:
        if not 0 <= node < self.num_nodes:
            raise IndexError(f"unknown node id {node}")

    @classmethod
    def from_edges(cls, num_nodes: int, edges, acs, num_channels: int,
                   pr_per_channel=None, positions=None) -> "Topology":
        """Build a hand-made topology, mostly for tests and small studies."""
        adj = np.zeros((num_nodes, num_nodes), dtype=bool)
        for u, v in edges:
            adj[u, v] = adj[v, u] = True
        if positions is None:
            positions = np.zeros((num_nodes, 2))
        if pr_per_channel is None:
            pr_per_channel = np.zeros(num_channels, dtype=np.int64)
        return cls(np.asarray(positions, dtype=float), adj, np.asarray(acs),
                   num_channels, np.asarray(pr_per_channel))


def pr_round_robin(num_pr_nodes: int, num_channels: int) -> np.ndarray:
    """Channel of each PR node (PR j sits on channel j mod C)."""
    return np.arange(num_pr_nodes) % num_channels


def unit_disk_adjacency(positions: np.ndarray, tx_range: float) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    adj = dist2 <= tx_range * tx_range
    np.fill_diagonal(adj, False)
    return adj


def random_acs(num_nodes: int, num_channels: int, acs_size: int,
               rng: np.random.Generator) -> np.ndarray:
    # Ranking i.i.d. uniforms gives a uniform random k-subset per row.
    keys = rng.random((num_nodes, num_channels))
    return np.sort(np.argsort(keys, axis=1)[:, :acs_size], axis=1)


def generate_topology(config: ScenarioConfig, rng: np.random.Generator) -> Topology:
    n = config.num_cr_nodes
    positions = rng.uniform(0.0, config.area_side, size=(n, 2))
    adj = unit_disk_adjacency(positions, config.tx_range)
    acs = random_acs(n, config.num_channels, config.acs_size, rng)
    pr = np.bincount(pr_round_robin(config.num_pr_nodes, config.num_channels),
                     minlength=config.num_channels)
    return Topology(positions, adj, acs, config.num_channels, pr)


def neighbors_on_channel(topology: Topology, node: int, channel: int) -> set[int]:
    """Geographic neighbors of ``node`` whose Acs contains ``channel``."""
    topology._check_node(node)
    if not 0 <= channel < topology.num_channels:
        raise ValueError(f"channel {channel} out of range")
    nbrs = topology.neighbor_lists[node]
    return {int(v) for v in nbrs[topology.acs_mask[nbrs, channel]]}


def dump_topology(topology: Topology) -> str:
    lines = []
    for node, ((x, y), row) in enumerate(zip(topology.positions, topology.acs)):
        acs = ",".join(str(int(c)) for c in row)
        lines.append(f"{node} {x:.3f} {y:.3f} acs=[{acs}]")
    return "\n".join(lines) + "\n"


def edges(topology: Topology):
    for u, v in itertools.combinations(range(topology.num_nodes), 2):
        if topology.adjacency[u, v]:
            yield u, v


@dataclass(frozen=True)
class Message:
    id: int
    source: int
    ttl_initial: int

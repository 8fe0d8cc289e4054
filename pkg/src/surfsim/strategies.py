"""Channel selection strategies: SURF, random (RD), selective broadcast (SB, CA).

Each strategy answers two questions per hop: which channel a holder
transmits on, and which channel(s) every other node overhears. The
per-node functions (``surf_select``, ``sb_decide``...) define the rules;
:meth:`Strategy.hop_decisions` applies the same rules to every node at once
for the simulation loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from surfsim.occupancy import ChannelView, PrActivityState, build_channel_views, weight_matrix
from surfsim.topology import Topology

TRANSMITTER = "transmitter"
LISTENER = "listener"


@dataclass(frozen=True)
class ChannelDecision:
    tx_channel: int | None
    rx_channels: frozenset


def surf_weight(pr_occupancy: float, cr_occupancy: float) -> float:
    return math.exp(-pr_occupancy) * cr_occupancy


def _pick(weights, pr, keys) -> int:
    best = max(weights)
    cand = [i for i, w in enumerate(weights) if w == best]
    low = min(pr[i] for i in cand)
    cand = [i for i in cand if pr[i] == low]
    return max(cand, key=lambda i: keys[i])


def surf_select(views: list[ChannelView], rng: np.random.Generator) -> int:
    """Highest weight; ties go to lower PR occupancy, then uniformly at random."""
    if not views:
        raise ValueError("surf_select needs at least one channel view")
    keys = rng.random(len(views))
    i = _pick([v.weight for v in views], [v.pr_occupancy for v in views], keys)
    return views[i].channel


def surf_select_rows(weights: np.ndarray, pr_fraction: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """Row-wise :func:`surf_select` over a (nodes, channels) weight matrix."""
    best = weights.max(axis=1, keepdims=True)
    cand = weights == best
    pr = np.broadcast_to(pr_fraction, weights.shape)
    low = np.where(cand, pr, np.inf).min(axis=1, keepdims=True)
    cand &= pr == low
    return np.where(cand, keys, -1.0).argmax(axis=1)


def rd_select(acs, rng: np.random.Generator) -> int:
    acs = list(acs)
    if not acs:
        raise ValueError("rd_select needs a nonempty channel set")
    return int(acs[rng.integers(len(acs))])


def compute_ecs(topology: Topology, node: int) -> list[int]:
    """Greedy set cover of the node's neighbors by its own Acs channels.

    Picks the channel reaching the most still-uncovered neighbors (lowest
    index on ties) until every neighbor sharing a channel is covered.
    """
    nbrs = topology.neighbors(node)
    reach = {int(c): set(nbrs[topology.acs_mask[nbrs, c]].tolist()) for c in topology.acs[node]}
    uncovered = set().union(*reach.values()) if reach else set()
    ecs: list[int] = []
    while uncovered:
        channel = max(sorted(reach), key=lambda c: (len(reach[c] & uncovered), -c))
        ecs.append(channel)
        uncovered -= reach[channel]
    return ecs


class Strategy:
    """Per-run strategy state: ECS caches for SB/CA, beta for SURF.

    Round-robin cursors are implicit: every node sits at ``round mod |ECS|``,
    starting from 0 at the first hop and advancing each round.
    """

    def __init__(self, kind: str, topology: Topology, beta: float = 10):
        if kind not in ("surf", "rd", "sb", "ca"):
            raise ValueError(f"unknown strategy {kind!r}")
        self.kind = kind
        self.beta = beta
        self.topology = topology
        self.ecs: list[list[int]] | None = None
        if kind in ("sb", "ca"):
            self.ecs = [compute_ecs(topology, u) for u in range(topology.num_nodes)]
            n = topology.num_nodes
            self._ecs_len = np.array([len(e) for e in self.ecs], dtype=np.int64)
            width = max(1, int(self._ecs_len.max(initial=0)))
            self._ecs_table = np.zeros((n, width), dtype=np.int64)
            self._ecs_mask = np.zeros((n, topology.num_channels), dtype=bool)
            for u, e in enumerate(self.ecs):
                self._ecs_table[u, :len(e)] = e
                self._ecs_mask[u, e] = True

    def cursor_channel(self, node: int, round_: int) -> int | None:
        ecs = self.ecs[node]
        return ecs[round_ % len(ecs)] if ecs else None

    def hop_decisions(self, pr_state: PrActivityState, round_: int, holders: np.ndarray,
                      rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Decide for all nodes at once.

        Returns ``(channel, tuned)``: ``channel[u]`` is the single channel each
        node picked (its tx channel if it is a holder) and ``tuned[v, c]`` marks
        non-holders overhearing channel ``c``.
        """
        topo = self.topology
        n = topo.num_nodes
        if self.kind == "surf":
            pr = pr_state.pr_fraction
            w = weight_matrix(topo, pr, self.beta)
            keys = rng.random(w.shape)
            channel = surf_select_rows(w, pr, keys)
        else:
            fallback = topo.acs[np.arange(n), rng.integers(topo.acs_size, size=n)]
            if self.kind == "rd":
                channel = fallback
            else:
                has = self._ecs_len > 0
                slot = np.where(has, round_ % np.maximum(self._ecs_len, 1), 0)
                channel = np.where(has, self._ecs_table[np.arange(n), slot], fallback)
        tuned = np.zeros((n, topo.num_channels), dtype=bool)
        tuned[np.arange(n), channel] = True
        if self.kind == "ca":
            has = self._ecs_len > 0
            tuned[has] = self._ecs_mask[has]
        tuned[holders] = False
        return channel, tuned


def sb_decide(strategy: Strategy, node: int, round_: int, rng: np.random.Generator) -> ChannelDecision:
    ch = strategy.cursor_channel(node, round_)
    if ch is None:
        ch = rd_select(strategy.topology.acs[node], rng)
    return ChannelDecision(ch, frozenset([ch]))


def ca_decide(strategy: Strategy, node: int, round_: int, rng: np.random.Generator) -> ChannelDecision:
    ch = strategy.cursor_channel(node, round_)
    if ch is None:
        ch = rd_select(strategy.topology.acs[node], rng)
        return ChannelDecision(ch, frozenset([ch]))
    return ChannelDecision(ch, frozenset(strategy.ecs[node]))


def decide(strategy: Strategy, topology: Topology, node: int, pr_state: PrActivityState,
           round_: int, rng: np.random.Generator, role: str = LISTENER) -> ChannelDecision:
    if role not in (TRANSMITTER, LISTENER):
        raise ValueError(f"unknown role {role!r}")
    if strategy.kind == "surf":
        ch = surf_select(build_channel_views(topology, node, pr_state, strategy.beta), rng)
        d = ChannelDecision(ch, frozenset([ch]))
    elif strategy.kind == "rd":
        ch = rd_select(topology.acs[node], rng)
        d = ChannelDecision(ch, frozenset([ch]))
    elif strategy.kind == "sb":
        d = sb_decide(strategy, node, round_, rng)
    else:
        d = ca_decide(strategy, node, round_, rng)
    # single transceiver: a node either sends or overhears in a round
    if role == LISTENER:
        return ChannelDecision(None, d.rx_channels)
    return ChannelDecision(d.tx_channel, frozenset())

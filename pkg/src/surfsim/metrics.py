"""Campaign aggregation: per-hop statistics, blocking, delivery, 95% t-intervals.

Sample conventions (one sample per run unless noted):

* neighbors per hop: mean CR_n over the hop's transmissions; a hop without
  transmissions gives no sample.
* receivers per hop: mean successes per transmission; hops after the
  dissemination died count as 0.
* loss ratio per hop: losses / (successes + losses); hops where nobody was
  tuned give no sample.
* accumulative receivers at hop h: nodes holding the message by hop h,
  source included at hop 0.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from surfsim.dissemination import RunTrace


@dataclass(frozen=True)
class Stat:
    mean: float
    ci95: float | None
    n: int


def ci95(samples) -> tuple[float, float | None]:
    """Mean and Student-t 95% half-width; half-width is None below two samples."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        return math.nan, None
    mean = float(x.mean())
    if x.size < 2:
        return mean, None
    sd = float(x.std(ddof=1))
    if sd == 0.0:
        return mean, 0.0
    return mean, float(stats.t.ppf(0.975, x.size - 1) * sd / math.sqrt(x.size))


def stat(samples) -> Stat:
    m, h = ci95(samples)
    return Stat(m, h, len(samples))


def _hop_samples(traces: list[RunTrace], per_run) -> list[Stat]:
    ttl = max(t.ttl_initial for t in traces)
    cols: list[list[float]] = [[] for _ in range(ttl)]
    for trace in traces:
        for hop, value in per_run(trace, ttl):
            cols[hop - 1].append(value)
    return [stat(c) for c in cols]


def _require(traces):
    if not traces:
        raise ValueError("need at least one run trace")


def per_hop_neighbors(traces: list[RunTrace]) -> list[Stat]:
    _require(traces)

    def per_run(trace, ttl):
        for h in trace.hops:
            if h.transmissions:
                yield h.hop, float(np.mean([t.cr_neighbors for t in h.transmissions]))

    return _hop_samples(traces, per_run)


def per_hop_receivers(traces: list[RunTrace]) -> list[Stat]:
    _require(traces)

    def per_run(trace, ttl):
        by_hop = {h.hop: h for h in trace.hops}
        for hop in range(1, ttl + 1):
            h = by_hop.get(hop)
            if h is None or not h.transmissions:
                yield hop, 0.0
            else:
                yield hop, float(np.mean([t.successes for t in h.transmissions]))

    return _hop_samples(traces, per_run)


def per_hop_loss_ratio(traces: list[RunTrace]) -> list[Stat]:
    _require(traces)

    def per_run(trace, ttl):
        for h in trace.hops:
            tried = sum(t.tuned for t in h.transmissions)
            if tried:
                yield h.hop, sum(t.losses for t in h.transmissions) / tried

    return _hop_samples(traces, per_run)


def blocking_ratio(traces: list[RunTrace]) -> Stat:
    """Share of messages that died at a hop where no transmitter was overheard."""
    _require(traces)
    return stat([float(t.blocked) for t in traces])


def delivery_ratio(traces: list[RunTrace]) -> tuple[list[Stat], Stat]:
    """Per-node share of runs the node held the message, and the network mean.

    A node is credited in the runs where it is the source.
    """
    _require(traces)
    got = np.array([t.received() for t in traces], dtype=float)
    per_node = [stat(got[:, i]) for i in range(got.shape[1])]
    return per_node, stat(got.mean(axis=1))


def accumulative_receivers(traces: list[RunTrace]) -> list[Stat]:
    """Index 0 is hop 0 (the source alone), then hops 1..TTL."""
    _require(traces)
    ttl = max(t.ttl_initial for t in traces)
    cols = [[float(np.count_nonzero((t.first_reception >= 0) & (t.first_reception <= h)))
             for t in traces] for h in range(ttl + 1)]
    return [stat(c) for c in cols]


def overall_receivers(traces: list[RunTrace]) -> Stat:
    """Per-run average of the receivers-per-hop samples, hops 1..TTL."""
    ttl = max(t.ttl_initial for t in traces)
    vals = []
    for trace in traces:
        by_hop = {h.hop: h for h in trace.hops if h.transmissions}
        vals.append(sum(float(np.mean([x.successes for x in by_hop[k].transmissions]))
                        for k in by_hop) / ttl)
    return stat(vals)


def overall_loss_ratio(traces: list[RunTrace]) -> Stat:
    """Per-run pooled loss ratio over all hops; runs where nobody was tuned are skipped."""
    vals = []
    for trace in traces:
        tried = sum(t.tuned for h in trace.hops for t in h.transmissions)
        if tried:
            vals.append(sum(t.losses for h in trace.hops for t in h.transmissions) / tried)
    return stat(vals)


def overall_neighbors(traces: list[RunTrace]) -> Stat:
    vals = [float(np.mean([t.cr_neighbors for h in tr.hops for t in h.transmissions]))
            for tr in traces if tr.transmissions]
    return stat(vals)


@dataclass
class CampaignResult:
    name: str
    config: dict
    num_runs: int
    neighbors_per_hop: list[Stat]
    receivers_per_hop: list[Stat]
    loss_ratio_per_hop: list[Stat]
    accumulative_receivers: list[Stat]
    delivery_per_node: list[Stat]
    delivery: Stat
    blocking: Stat
    receivers: Stat
    loss_ratio: Stat
    neighbors: Stat
    transmissions_per_run: Stat
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_traces(cls, name: str, config: dict, traces: list[RunTrace]) -> "CampaignResult":
        per_node, network = delivery_ratio(traces)
        return cls(
            name=name, config=config, num_runs=len(traces),
            neighbors_per_hop=per_hop_neighbors(traces),
            receivers_per_hop=per_hop_receivers(traces),
            loss_ratio_per_hop=per_hop_loss_ratio(traces),
            accumulative_receivers=accumulative_receivers(traces),
            delivery_per_node=per_node,
            delivery=network,
            blocking=blocking_ratio(traces),
            receivers=overall_receivers(traces),
            loss_ratio=overall_loss_ratio(traces),
            neighbors=overall_neighbors(traces),
            transmissions_per_run=stat([float(t.transmissions) for t in traces]),
        )

    def to_dict(self) -> dict:
        return asdict(self)


# metric name -> (index column, attribute, first index)
CSV_METRICS = {
    "neighbors_per_hop": ("hop", "neighbors_per_hop", 1),
    "receivers_per_hop": ("hop", "receivers_per_hop", 1),
    "loss_ratio_per_hop": ("hop", "loss_ratio_per_hop", 1),
    "accumulative_receivers": ("hop", "accumulative_receivers", 0),
    "delivery_ratio": ("node_id", "delivery_per_node", 0),
}
SCALAR_METRICS = ("blocking", "delivery", "receivers", "loss_ratio", "neighbors",
                  "transmissions_per_run")


def _fmt(x):
    if x is None:
        return "NA"
    return repr(float(x))


def write_csvs(results: list[CampaignResult], out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for metric, (index, attr, start) in CSV_METRICS.items():
        with open(out_dir / f"{metric}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["cell", index, "mean", "ci95", "n"])
            for r in results:
                for i, s in enumerate(getattr(r, attr), start):
                    w.writerow([r.name, i, _fmt(s.mean), _fmt(s.ci95), s.n])
    with open(out_dir / "scalars.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell", "metric", "mean", "ci95", "n"])
        for r in results:
            for m in SCALAR_METRICS:
                s = getattr(r, m)
                w.writerow([r.name, m, _fmt(s.mean), _fmt(s.ci95), s.n])


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_clean(v) for v in obj]
    return obj


def summary_json(results: list[CampaignResult], header: dict) -> str:
    doc = dict(header)
    doc["cells"] = [_clean(r.to_dict()) for r in results]
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"

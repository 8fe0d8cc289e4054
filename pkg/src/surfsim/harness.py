"""Experiment presets and seeded campaign execution.

Seed splitting (part of the output contract, so other implementations can
reproduce the same random streams):

    mix64(z)       SplitMix64 finalizer on 64-bit unsigned z
    cell_seed(i)   = mix64(campaign_seed XOR mix64(i))
    run_seed(r)    = mix64(cell_seed XOR r)

Each run draws everything from ``numpy.random.Generator(PCG64(run_seed))``
in a fixed order: topology, PR ON probabilities, source, then per hop the
PR state, channel decisions and reception trials. Results therefore do not
depend on how runs are spread across worker processes.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from surfsim.config import ScenarioConfig
from surfsim.dissemination import RunTrace, run_dissemination, traces_to_csv
from surfsim.metrics import CampaignResult, summary_json, write_csvs
from surfsim.occupancy import PrEnvironment
from surfsim.strategies import Strategy
from surfsim.topology import generate_topology

_MASK = (1 << 64) - 1
GENERATOR = "numpy PCG64"
SEED_RULE = "cell=mix64(seed^mix64(cell_index)); run=mix64(cell^run_index); mix64=splitmix64 finalizer"


def mix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def cell_seed(campaign_seed: int, cell_index: int) -> int:
    return mix64((campaign_seed ^ mix64(cell_index)) & _MASK)


def run_seed(seed: int, run_index: int) -> int:
    return mix64((seed ^ run_index) & _MASK)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def simulate_run(config: ScenarioConfig, seed: int, run_index: int = 0) -> RunTrace:
    """One independent run: fresh topology, PR activity, source and dissemination."""
    rng = make_rng(seed)
    topology = generate_topology(config, rng)
    strategy = Strategy(config.strategy, topology, config.beta)
    pr_env = PrEnvironment(config, topology, rng)
    return run_dissemination(topology, strategy, pr_env, config, rng, message_id=run_index)


def _run_chunk(args) -> list[RunTrace]:
    config, seed, indices = args
    return [simulate_run(config, run_seed(seed, r), r) for r in indices]


def run_cell(config: ScenarioConfig, seed: int, jobs: int = 1) -> list[RunTrace]:
    runs = range(config.num_runs)
    if jobs <= 1:
        return _run_chunk((config, seed, runs))
    size = max(1, -(-config.num_runs // (jobs * 4)))
    chunks = [(config, seed, runs[i:i + size]) for i in range(0, config.num_runs, size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(itertools.chain.from_iterable(pool.map(_run_chunk, chunks)))


@dataclass
class Preset:
    name: str
    figure: str
    description: str
    template: ScenarioConfig
    # each entry overrides template fields for one cell
    sweep: list[dict] = field(default_factory=list)

    @property
    def swept(self) -> tuple[str, ...]:
        keys: list[str] = []
        for overrides in self.sweep:
            keys.extend(k for k in overrides if k not in keys)
        return tuple(keys)

    def cells(self) -> list[tuple[str, ScenarioConfig]]:
        out = []
        for overrides in self.sweep or [{}]:
            label = "-".join(_LABELS.get(k, k) + str(v) for k, v in overrides.items())
            out.append((label or self.name, self.template.replace(**overrides)))
        return out


_LABELS = {"num_channels": "ch", "acs_size": "acs", "beta": "b", "pr_slots": "slots",
           "strategy": ""}


BETAS = (1, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 25, 30)
# per channel count: (Acs in the dynamic/comparison scenario, recommended beta)
COMPARISON = {5: (3, 10), 15: (8, 18)}
PAPER = ScenarioConfig(num_cr_nodes=70, num_pr_nodes=30, total_slots=6, area_side=707.0,
                       tx_range=250.0, num_runs=1000)


def presets() -> list[Preset]:
    dyn = PAPER.replace(pr_model="dynamic")
    strategy_cells = [
        {"num_channels": ch, "acs_size": acs, "beta": beta, "strategy": s}
        for ch, (acs, beta) in COMPARISON.items() for s in ("surf", "rd", "sb", "ca")
    ]
    return [
        Preset("beta-vs-pr", "fig2a/fig2",
               "beta sweep under fixed PR occupancy of 0, 2 and 3 slots; Ch=5, Acs=3",
               PAPER.replace(num_channels=5, acs_size=3, pr_model="fixed"),
               [{"pr_slots": s, "beta": b} for s in (0, 2, 3) for b in BETAS]),
        Preset("beta-vs-acs", "fig4/fig5",
               "beta sweep with no PR activity for Acs in {5,4,3} of 5 and {15,12,8} of 15",
               PAPER.replace(pr_model="fixed", pr_slots=0),
               [{"num_channels": ch, "acs_size": a, "beta": b}
                for ch, sizes in ((5, (5, 4, 3)), (15, (15, 12, 8))) for a in sizes for b in BETAS]),
        Preset("beta-dynamic", "fig13/fig6",
               "beta sweep with PR nodes ON with probability in [0.2, 0.8]; Acs=3/Ch=5, Acs=8/Ch=15",
               dyn,
               [{"num_channels": ch, "acs_size": acs, "beta": b}
                for ch, (acs, _) in COMPARISON.items() for b in BETAS]),
        Preset("strategy-blocking", "fig7",
               "blocking ratio of SURF, RD, SB and CA at Ch=5 (beta=10) and Ch=15 (beta=18)",
               dyn, strategy_cells),
        Preset("strategy-dissemination", "fig9/fig10",
               "accumulative receivers and delivery ratio of SURF, RD, SB and CA",
               dyn, list(strategy_cells)),
    ]


def get_preset(name: str) -> Preset:
    for p in presets():
        if p.name == name:
            return p
    raise KeyError(f"unknown preset {name!r}; try one of {[p.name for p in presets()]}")


def run_campaign(cells: list[tuple[str, ScenarioConfig]], seed: int, jobs: int = 1,
                 out_dir: str | Path | None = None, name: str = "campaign",
                 trace: bool = False) -> list[CampaignResult]:
    """Run every cell, aggregate, and (if ``out_dir``) write CSVs and summary.json."""
    results = []
    traces_by_cell = []
    for i, (label, config) in enumerate(cells):
        traces = run_cell(config, cell_seed(seed, i), jobs)
        results.append(CampaignResult.from_traces(label, config.to_dict(), traces))
        if trace:
            traces_by_cell.append((label, traces))
    if out_dir is not None:
        target = Path(out_dir) / name
        write_csvs(results, target)
        header = {"name": name, "seed": seed, "generator": GENERATOR, "seed_rule": SEED_RULE}
        (target / "summary.json").write_text(summary_json(results, header))
        for label, traces in traces_by_cell:
            (target / f"trace-{label}.csv").write_text(traces_to_csv(traces))
    return results


def default_jobs() -> int:
    return max(1, os.cpu_count() or 1)

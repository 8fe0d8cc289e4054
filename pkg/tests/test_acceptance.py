"""Acceptance criteria. Each test appends one PASS/FAIL line to the session summary.

Campaign-scale checks run the full 1000 runs per cell; they are marked slow.
"""

import math
import time

import numpy as np
import pytest

from oracles import brute_min_cover, cr_occupancy_direct, exact_delivery, loss_direct
from surfsim.cli import main
from surfsim.config import ScenarioConfig
from surfsim.dissemination import loss_probability, run_dissemination
from surfsim.harness import PAPER, get_preset, make_rng, run_campaign, run_seed
from surfsim.occupancy import PrEnvironment, cr_occupancy, cr_occupancy_array
from surfsim.strategies import Strategy, compute_ecs, surf_weight
from surfsim.topology import Topology

SEED = 20240601


def _line(report, num, ok, text):
    report(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {text}")


def _half(s):
    return s.ci95 or 0.0


def test_c01_occupancy_oracle(report):
    t0 = time.perf_counter()
    worst = 0.0
    for space in (0.0, 0.25, 0.5, 1.0):
        for beta in range(1, 31):
            ns = np.arange(61)
            vec = cr_occupancy_array(space, ns, beta)
            for n in range(61):
                ref = cr_occupancy_direct(space, n, beta)
                worst = max(worst, abs(cr_occupancy(space, n, beta) - ref), abs(vec[n] - ref))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 1.0
    _line(report, 1, ok, f"cr_occupancy max error {worst:.1e} over 7320 points in {elapsed:.2f}s")
    assert ok


def test_c02_weight_and_loss(report):
    t0 = time.perf_counter()
    cases = [
        (surf_weight(0.0, 1.0), 1.0), (surf_weight(0.5, 0.5), 0.30326532985631671),
        (surf_weight(1.0, 0.0), 0.0),
        (cr_occupancy(0.6, 5, 10), 0.12), (cr_occupancy(0.6, 10, 10), 0.6),
        (cr_occupancy(0.6, 20, 10), 0.03),
        (loss_probability(4, 8), 0.5), (loss_probability(4, 2), 0.01),
        (loss_probability(0, 5), 1.0), (loss_probability(6, 6), 0.0),
    ]
    worst = max(abs(a - b) for a, b in cases)
    clamps = all(loss_probability(0, n) == 1.0 for n in range(0, 40)) and \
        all(loss_probability(s, n) == 0.01 for s in range(1, 7) for n in range(s)) and \
        all(loss_probability(s, n) == pytest.approx(loss_direct(s, n), abs=1e-12)
            for s in range(7) for n in range(40))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and clamps and elapsed < 1.0
    _line(report, 2, ok, f"weight/loss max error {worst:.1e}, clamps {'hold' if clamps else 'broken'}")
    assert ok


@pytest.mark.slow
def test_c03_beta_flatness(report):
    t0 = time.perf_counter()
    base = PAPER.replace(num_channels=5, acs_size=3, pr_model="fixed", pr_slots=2)
    res = run_campaign([(f"b{b}", base.replace(beta=b)) for b in (2, 4, 6)], seed=SEED)
    curves = [np.array([s.mean for s in r.neighbors_per_hop]) for r in res]
    worst = 0.0
    for i in range(3):
        for j in range(i + 1, 3):
            a, b = curves[i], curves[j]
            worst = max(worst, float(np.max(np.abs(a - b) / np.minimum(a, b))))
    elapsed = time.perf_counter() - t0
    ok = worst < 0.05 and elapsed < 60
    _line(report, 3, ok, f"neighbor curves for beta 2/4/6 differ by at most {worst:.1%} "
                         f"({elapsed:.0f}s)")
    assert ok


@pytest.mark.slow
def test_c04_pr_occupancy_ordering(report):
    t0 = time.perf_counter()
    base = PAPER.replace(num_channels=5, acs_size=3, pr_model="fixed", beta=10)
    res = run_campaign([(f"slots{s}", base.replace(pr_slots=s)) for s in (0, 2, 3)], seed=SEED)
    rx = [r.receivers for r in res]
    loss = [r.loss_ratio for r in res]
    gaps = []
    for i in range(2):
        gaps.append(rx[i].mean - rx[i + 1].mean > _half(rx[i]) + _half(rx[i + 1]))
        gaps.append(loss[i + 1].mean - loss[i].mean > _half(loss[i]) + _half(loss[i + 1]))
    elapsed = time.perf_counter() - t0
    ok = all(gaps) and elapsed < 180
    _line(report, 4, ok, "receivers " + " > ".join(f"{s.mean:.3f}" for s in rx)
          + ", loss " + " < ".join(f"{s.mean:.3f}" for s in loss) + f" (beta=10, {elapsed:.0f}s)")
    assert ok


@pytest.mark.slow
def test_c05_degenerate_acs(report):
    base = PAPER.replace(num_channels=5, acs_size=5, pr_model="fixed", pr_slots=0)
    res = run_campaign([(f"b{b}", base.replace(beta=b)) for b in (5, 15, 25)], seed=SEED)
    rx = [r.receivers for r in res]
    lo = max(s.mean - _half(s) for s in rx)
    hi = min(s.mean + _half(s) for s in rx)
    ok = lo <= hi
    _line(report, 5, ok, "receivers for beta 5/15/25: "
          + ", ".join(f"{s.mean:.3f}±{_half(s):.3f}" for s in rx)
          + (" (intervals overlap)" if ok else " (intervals disjoint)"))
    assert ok


@pytest.fixture(scope="module")
def blocking_campaign():
    t0 = time.perf_counter()
    res = run_campaign(get_preset("strategy-blocking").cells(), seed=SEED)
    return {r.name: r for r in res}, time.perf_counter() - t0


@pytest.fixture(scope="module")
def dissemination_campaign():
    res = run_campaign(get_preset("strategy-dissemination").cells(), seed=SEED)
    return {r.name: r for r in res}


def _cell(ch, strategy):
    acs, beta = {5: (3, 10), 15: (8, 18)}[ch]
    return f"ch{ch}-acs{acs}-b{beta}-{strategy}"


def _exceeds(low, high):
    """True if ``high`` exceeds ``low`` by more than the combined CI half-widths."""
    return high.mean - low.mean > _half(low) + _half(high)


@pytest.mark.slow
def test_c06_blocking_strategies_at_15(report, blocking_campaign):
    res, elapsed = blocking_campaign
    surf, rd, sb = (res[_cell(15, s)].blocking for s in ("surf", "rd", "sb"))
    ok = _exceeds(surf, rd) and _exceeds(surf, sb) and elapsed < 300
    _line(report, 6, ok, f"Ch=15 blocking SURF {surf.mean:.3f} < RD {rd.mean:.3f}, "
                         f"SURF < SB {sb.mean:.3f} ({elapsed:.0f}s for 8000 runs)")
    assert ok


@pytest.mark.slow
def test_c06_blocking_surf_channels(report, blocking_campaign):
    res, _ = blocking_campaign
    s5, s15 = res[_cell(5, "surf")].blocking, res[_cell(15, "surf")].blocking
    ok = s15.mean < s5.mean
    _line(report, 6, ok, f"SURF blocking Ch=15 {s15.mean:.3f}±{_half(s15):.3f} "
                         f"< Ch=5 {s5.mean:.3f}±{_half(s5):.3f}")
    assert ok


@pytest.mark.slow
def test_c06_blocking_rd_channels(report, blocking_campaign):
    res, _ = blocking_campaign
    r5, r15 = res[_cell(5, "rd")].blocking, res[_cell(15, "rd")].blocking
    ok = r15.mean > r5.mean
    _line(report, 6, ok, f"RD blocking Ch=15 {r15.mean:.3f} > Ch=5 {r5.mean:.3f}")
    assert ok


@pytest.mark.slow
def test_c07_delivery_ordering(report, dissemination_campaign):
    res = dissemination_campaign
    ok = True
    parts = []
    for ch in (5, 15):
        d = {s: res[_cell(ch, s)].delivery.mean for s in ("surf", "rd", "sb", "ca")}
        good = d["ca"] >= d["surf"] > max(d["rd"], d["sb"])
        ok &= good
        parts.append(f"Ch={ch} CA {d['ca']:.3f} >= SURF {d['surf']:.3f} > "
                     f"max(RD {d['rd']:.3f}, SB {d['sb']:.3f})")
    _line(report, 7, ok, "hard gate, " + "; ".join(parts))
    assert ok


def _band(report, name, value, lo=None, hi=None):
    ok = (lo is None or value >= lo) and (hi is None or value <= hi)
    if lo is not None and hi is not None:
        rng = f"[{lo}, {hi}]"
    else:
        rng = f">= {lo}" if lo is not None else f"< {hi}"
    report(f"[{'PASS' if ok else 'MISS'}] criterion 7 soft band: {name} = {value:.3f}, target {rng}")


@pytest.mark.slow
def test_c07_delivery_bands_and_sensitivity(report, dissemination_campaign):
    """Soft gates: report bands, then how delivery moves with PR load and Acs."""
    res = dissemination_campaign
    for ch in (5, 15):
        _band(report, f"SURF delivery Ch={ch}", res[_cell(ch, "surf")].delivery.mean, 0.45, 0.75)
        _band(report, f"CA delivery Ch={ch}", res[_cell(ch, "ca")].delivery.mean, 0.65, 0.90)
        for s in ("rd", "sb"):
            _band(report, f"{s.upper()} delivery Ch={ch}", res[_cell(ch, s)].delivery.mean, hi=0.30)
    acc = res[_cell(15, "surf")].accumulative_receivers[-1].mean / 70
    _band(report, "SURF accumulative receivers Ch=15 (fraction)", acc, lo=0.45)

    # sensitivity: same comparison under lighter PR load and other Acs sizes
    variants = [
        ("fixed PR 0 slots", dict(pr_model="fixed", pr_slots=0), {5: 3, 15: 8}),
        ("fixed PR 2 slots", dict(pr_model="fixed", pr_slots=2), {5: 3, 15: 8}),
        ("dynamic PR, Acs 4/12", dict(pr_model="dynamic"), {5: 4, 15: 12}),
    ]
    report("criterion 7 sensitivity (300 runs per cell, network-mean delivery):")
    for label, overrides, acs in variants:
        cells = []
        for ch, beta in ((5, 10), (15, 18)):
            for s in ("surf", "rd", "sb", "ca"):
                cfg = PAPER.replace(num_channels=ch, acs_size=acs[ch], beta=beta, strategy=s,
                                    num_runs=300, **overrides)
                cells.append((f"{ch}-{s}", cfg))
        out = {r.name: r.delivery.mean for r in run_campaign(cells, seed=SEED)}
        for ch in (5, 15):
            d = {s: out[f"{ch}-{s}"] for s in ("surf", "rd", "sb", "ca")}
            order = d["ca"] >= d["surf"] > max(d["rd"], d["sb"])
            report(f"    {label:22s} Ch={ch:2d}: SURF {d['surf']:.3f} CA {d['ca']:.3f} "
                   f"RD {d['rd']:.3f} SB {d['sb']:.3f}  ordering {'holds' if order else 'broken'}")


@pytest.mark.slow
def test_c08_determinism(report, tmp_path):
    def summary(sub, jobs):
        out = tmp_path / sub
        assert main(["run", "--preset", "strategy-blocking", "--runs", "200", "--seed", "11",
                     "--jobs", str(jobs), "--out", str(out)]) == 0
        return (out / "strategy-blocking" / "summary.json").read_bytes()

    a, b, c = summary("a", 1), summary("b", 1), summary("c", 8)
    ok = a == b == c
    _line(report, 8, ok, "summary.json byte-identical across repeat and --jobs 1/8 "
                         f"({len(a)} bytes)" if ok else "summary.json differs")
    assert ok


def _small_cases():
    # (name, edges, acs, channels, pr_slots, beta, ttl)
    return [
        ("path4-3ch", [(0, 1), (1, 2), (2, 3)], [[0, 1], [1, 2], [0, 1], [1, 2]], 3, 2, 2, 3),
        ("kite5-3ch", [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4)],
         [[0, 1], [0, 2], [1, 2], [0, 1], [0, 2]], 3, 3, 3, 3),
        ("star6-3ch", [(0, v) for v in range(1, 6)] + [(1, 2)],
         [[0, 1], [0, 2], [0, 1], [1, 2], [0, 1], [1, 2]], 3, 1, 2, 2),
    ]


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["surf", "rd"])
def test_c09_small_instance_enumeration(report, kind):
    runs = 100_000
    lines = []
    ok = True
    for name, edges, acs, channels, slots, beta, ttl in _small_cases():
        n = len(acs)
        topo = Topology.from_edges(n, edges, acs, channels, pr_per_channel=np.zeros(channels, int))
        cfg = ScenarioConfig(num_cr_nodes=n, num_pr_nodes=0, num_channels=channels,
                             acs_size=len(acs[0]),
                             pr_slots=slots, beta=beta, ttl=ttl, strategy=kind)
        strategy = Strategy(kind, topo, beta)
        env = PrEnvironment(cfg, topo, make_rng(0))
        x = np.empty(runs)
        for r in range(runs):
            trace = run_dissemination(topo, strategy, env, cfg, make_rng(run_seed(SEED, r)))
            x[r] = trace.received().mean()
        adj = [set(topo.neighbors(u).tolist()) for u in range(n)]
        exact = exact_delivery(kind, adj, [set(a) for a in acs], [slots] * channels, 6, beta, ttl)
        se = x.std(ddof=1) / math.sqrt(runs)
        z = abs(x.mean() - exact) / se
        ok &= z < 3
        lines.append(f"{name} exact {exact:.4f} mc {x.mean():.4f} ({z:.1f} SE)")
    _line(report, 9, ok, f"{kind.upper()}: " + "; ".join(lines))
    assert ok


def test_c10_greedy_ecs(report):
    rng = make_rng(SEED)
    worst = 0.0
    ok = True
    for _ in range(100):
        channels = int(rng.integers(2, 9))
        k = int(rng.integers(1, min(5, channels) + 1))
        degree = int(rng.integers(1, 9))
        acs = [sorted(rng.choice(channels, size=k, replace=False).tolist())
               for _ in range(degree + 1)]
        topo = Topology.from_edges(degree + 1, [(0, v) for v in range(1, degree + 1)], acs, channels)
        ecs = compute_ecs(topo, 0)
        reach = {c: {v for v in range(1, degree + 1) if c in acs[v]} for c in acs[0]}
        targets = set().union(*reach.values())
        covered = set().union(*(reach[c] for c in ecs)) if ecs else set()
        opt = brute_min_cover(reach, targets)
        ok &= covered == targets and len(ecs) <= 2 * opt
        if opt:
            worst = max(worst, len(ecs) / opt)
    _line(report, 10, ok, f"greedy ECS valid on 100 instances, worst ratio to optimum {worst:.2f}")
    assert ok

"""Command line entry point: ``surfsim list-presets | run | dump-topology``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from surfsim.config import ConfigError, ScenarioConfig, dump_config, load_config
from surfsim.harness import get_preset, make_rng, presets, run_campaign
from surfsim.occupancy import PrEnvironment, build_channel_views, views_to_csv
from surfsim.topology import dump_topology, generate_topology


def _list_presets(args) -> int:
    for p in presets():
        cells = p.cells()
        print(f"{p.name:24s} {len(cells):3d} cells  [{p.figure}]  {p.description}")
        if args.verbose:
            for label, cfg in cells:
                print(f"    {label}")
            print("    template:")
            for line in dump_config(p.template).splitlines():
                print(f"      {line}")
    return 0


def _run(args) -> int:
    if args.preset:
        preset = get_preset(args.preset)
        name, cells = preset.name, preset.cells()
        seed = args.seed if args.seed is not None else preset.template.rng_seed
    else:
        config = load_config(args.config)
        name, cells = Path(args.config).stem, [(Path(args.config).stem, config)]
        seed = args.seed if args.seed is not None else config.rng_seed
    overrides = {"rng_seed": seed}
    if args.runs is not None:
        overrides["num_runs"] = args.runs
    cells = [(label, cfg.replace(**overrides)) for label, cfg in cells]
    results = run_campaign(cells, seed, jobs=args.jobs, out_dir=args.out, name=name,
                           trace=args.trace)
    for r in results:
        d, b = r.delivery, r.blocking
        print(f"{r.name:40s} delivery={d.mean:.3f}  blocking={b.mean:.3f}  "
              f"receivers/hop={r.receivers.mean:.3f}  n={r.num_runs}")
    print(f"wrote {Path(args.out) / name}")
    return 0


def _dump_topology(args) -> int:
    config = load_config(args.config) if args.config else ScenarioConfig()
    rng = make_rng(args.seed)
    topo = generate_topology(config, rng)
    if args.views:
        pr_state = PrEnvironment(config, topo, rng).sample(rng)
        rows = [(u, v) for u in range(topo.num_nodes)
                for v in build_channel_views(topo, u, pr_state, config.beta)]
        sys.stdout.write(views_to_csv(rows))
    else:
        sys.stdout.write(dump_topology(topo))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="surfsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list-presets", help="show the built-in experiment presets")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=_list_presets)

    p = sub.add_parser("run", help="run a preset or a scenario file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset")
    src.add_argument("--config", help="flat key = value scenario file")
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--out", default="results")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--trace", action="store_true", help="also write per-transmission CSV traces")
    p.set_defaults(func=_run)

    p = sub.add_parser("dump-topology", help="print one generated topology")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--views", action="store_true", help="print per-channel SURF views as CSV")
    p.set_defaults(func=_dump_topology)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

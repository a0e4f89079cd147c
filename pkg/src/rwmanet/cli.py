"""Command line: ``simulate``, ``analyze`` and ``scenario print``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import analysis
from .engine import SimulationError, seconds
from .runner import PROTOCOLS, run
from .scenario import BUILTIN, ScenarioConfig, ScenarioError, builtin, parse_scenario, parse_seeds
from .world import World


def load_scenario(spec: str) -> ScenarioConfig:
    """A scenario file path, ``-`` for stdin, or the name of a built-in scenario."""
    if spec == "-":
        return parse_scenario(sys.stdin.read())
    path = Path(spec)
    if path.is_file():
        return parse_scenario(path.read_text(encoding="utf-8"))
    if spec in BUILTIN:
        return builtin(spec)
    raise ScenarioError(f"no scenario file or built-in named {spec!r}")


def cmd_simulate(args) -> int:
    cfg = load_scenario(args.scenario)
    seeds = parse_seeds(args.seeds) if args.seeds else cfg.seeds
    protocols = PROTOCOLS if args.protocol == "both" else (args.protocol,)
    bin_width = seconds(args.bin_width)
    if bin_width <= 0:
        raise ScenarioError("--bin-width must be positive")
    text, results = run(cfg, protocols, seeds, bin_width)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for res in results:
        print(res.summary(), file=sys.stderr)
    if not all(res.conserved for res in results):
        print("error: packet conservation violated", file=sys.stderr)
        return 1
    return 0


def analyze_rows(cfg: ScenarioConfig, k_max: int = 20, src: int | None = None,
                 dst: int | None = None, t: int = 0) -> list[str]:
    world = World(cfg.nodes, cfg.moves, cfg.radio)
    if src is None:
        src = cfg.streams[0].src if cfg.streams else 0
    if dst is None:
        dst = cfg.streams[0].dst if cfg.streams else world.n - 1
    for v in (src, dst):
        if not 0 <= v < world.n:
            raise ScenarioError(f"unknown node {v}")
    r = cfg.radio.range_m
    dep = analysis.StaticDeployment.of(world.positions_at(t), r)
    e_n = analysis.expected_neighbors(dep, src)
    rows = ["quantity,index,value", f"expected_neighbors,{src},{e_n:.6f}"]
    if src != dst:
        cdf = analysis.estimate_distance_cdf(world, src, dst, t, [k * r for k in range(1, k_max + 1)])
    else:
        cdf = [1.0] * k_max
    rows += [f"distance_cdf,{k},{f:.6f}" for k, f in enumerate(cdf, 1)]
    if e_n > 0:
        sums = analysis.expected_walk_length_series(e_n, cdf)
        rows += [f"series_partial_sum,{k},{s:.6f}" for k, s in enumerate(sums, 1)]
    adj = world.adjacency(t)
    for label, direct in (("hitting_time_simple", False), ("hitting_time_direct", True)):
        try:
            h = f"{analysis.hitting_time_oracle(adj, src, dst, direct_delivery=direct):.6f}"
        except analysis.Unreachable:
            h = "unreachable"
        rows.append(f"{label},{src}->{dst},{h}")
    return rows


def cmd_analyze(args) -> int:
    cfg = load_scenario(args.scenario)
    src, dst = args.oracle if args.oracle else (None, None)
    if args.series_K < 1:
        raise ScenarioError("--series-K must be >= 1")
    rows = analyze_rows(cfg, args.series_K, src, dst, seconds(args.time))
    sys.stdout.write("\n".join(rows) + "\n")
    return 0


def cmd_scenario(args) -> int:
    if args.name not in BUILTIN:
        raise ScenarioError(f"unknown built-in scenario {args.name!r}; have {sorted(BUILTIN)}")
    sys.stdout.write(BUILTIN[args.name])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rwmanet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the scenario and write binned CSV")
    p.add_argument("--scenario", required=True, help="scenario file or built-in name")
    p.add_argument("--protocol", choices=PROTOCOLS + ("both",), default="randwalk")
    p.add_argument("--seeds", help="e.g. 1..20 or 1,2,3 (default: from the scenario)")
    p.add_argument("--bin-width", type=float, default=0.25, help="seconds")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="neighbor count, walk series and hitting times")
    p.add_argument("--scenario", required=True)
    p.add_argument("--series-K", dest="series_K", type=int, default=20)
    p.add_argument("--oracle", nargs=2, type=int, metavar=("SRC", "DST"))
    p.add_argument("--time", type=float, default=0.0, help="evaluation time in seconds")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("scenario", help="built-in scenarios")
    ssub = p.add_subparsers(dest="action", required=True)
    pp = ssub.add_parser("print")
    pp.add_argument("name")
    pp.set_defaults(func=cmd_scenario)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, SimulationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end.

Subcommands: ``run`` (simulate one configuration, one bundle per run),
``sweep`` (grid of configurations from a JSON grid file), ``validate``
(scenario lint) and ``curves`` (path-loss curve export).  Exit codes: 0 on
success, 2 on configuration errors, 3 on a runtime invariant breach in
strict mode.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import sys
from dataclasses import replace

from . import channel, engine, metrics, scenario
from .errors import ConfigError, InvariantViolation

ENV_OUT_DIR = "SEAHAUL_OUT_DIR"

#: Grid-point override keys accepted by ``sweep`` files.
POINT_KEYS = (
    "topology",
    "rain_rate_mmh",
    "dl_rate_mbps",
    "ul_rate_factor",
    "pattern",
    "mux_mode",
    "n_s_odd",
    "duration_s",
)


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--scenario", help="scenario JSON file")
    src.add_argument("--topology", type=int, choices=(1, 2, 3, 4), help="built-in deployment")
    p.add_argument("--rain", type=float, default=None, metavar="MMH", help="rain rate [mm/h]")
    p.add_argument("--dl-rate", type=float, default=None, metavar="MBPS", help="per-node DL source rate [Mb/s]")
    p.add_argument("--ul-factor", type=float, default=None, help="UL rate as a fraction of the DL rate")
    p.add_argument("--pattern", default=None, help="slot pattern name (4DS2U, 3DS2U)")
    p.add_argument("--mux", choices=("tdm", "fdm"), default=None, help="MT/DU multiplexing mode")
    p.add_argument("--ns-odd", type=int, default=None, metavar="K", help="symbols for odd-layer nodes (TDM)")
    p.add_argument("--duration", type=float, default=None, metavar="S", help="simulated time [s]")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-strict", action="store_true", help="record invariant breaches instead of aborting")
    p.add_argument("--no-warmup", action="store_true", help="include the warm-up window in summaries")


def _base_scenario(args) -> scenario.Scenario:
    if args.scenario:
        scn = scenario.load(args.scenario)
    else:
        scn = scenario.builtin_topology(args.topology or 1)
    return _apply_overrides(scn, _args_point(args))


def _args_point(args) -> dict:
    point: dict = {}
    if args.rain is not None:
        point["rain_rate_mmh"] = args.rain
    if getattr(args, "dl_rate", None) is not None:
        point["dl_rate_mbps"] = args.dl_rate
    if args.ul_factor is not None:
        point["ul_rate_factor"] = args.ul_factor
    if args.pattern is not None:
        point["pattern"] = args.pattern
    if args.mux is not None:
        point["mux_mode"] = args.mux
    if args.ns_odd is not None:
        point["n_s_odd"] = args.ns_odd
    if args.duration is not None:
        point["duration_s"] = args.duration
    return point


def _apply_overrides(scn: scenario.Scenario, point: dict) -> scenario.Scenario:
    unknown = set(point) - set(POINT_KEYS)
    if unknown:
        raise ConfigError(f"unknown override keys: {sorted(unknown)}")
    if "topology" in point:
        scn = scenario.builtin_topology(int(point["topology"]))
    if "rain_rate_mmh" in point:
        scn = replace(scn, channel=replace(scn.channel, rain_rate_mmh=float(point["rain_rate_mmh"])))
    if "dl_rate_mbps" in point:
        scn = replace(scn, traffic=replace(scn.traffic, dl_rate_bps=float(point["dl_rate_mbps"]) * 1e6))
    if "ul_rate_factor" in point:
        scn = replace(scn, traffic=replace(scn.traffic, ul_rate_factor=float(point["ul_rate_factor"])))
    if "pattern" in point:
        scn = replace(scn, slot_pattern=scenario.SlotPattern.parse(point["pattern"]))
    if "mux_mode" in point:
        scn = replace(scn, mux=replace(scn.mux, mode=point["mux_mode"]))
    if "n_s_odd" in point:
        scn = replace(scn, mux=replace(scn.mux, n_s_odd=int(point["n_s_odd"])))
    if "duration_s" in point:
        scn = replace(scn, duration_s=float(point["duration_s"]))
    return scn


def _out_dir(args) -> str:
    if args.out:
        return args.out
    return os.environ.get(ENV_OUT_DIR, "out")


def _run_points(scn: scenario.Scenario, points: list[dict], runs: int, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    manifest_path = os.path.join(out_dir, "campaign.csv")
    with open(manifest_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(metrics.CAMPAIGN_HEADER)
        for point_idx, point in enumerate(points or [{}]):
            for _, r, seed, result in engine.run_campaign(scn, [point], run_count=runs, apply_point=_apply_overrides):
                rel = os.path.join(f"point{point_idx:03d}", f"run{r:03d}")
                metrics.write_bundle(result, os.path.join(out_dir, rel))
                s = result.scenario
                w.writerow(
                    [
                        point_idx,
                        r,
                        seed,
                        s.name,
                        metrics._fmt(s.channel.rain_rate_mmh),
                        metrics._fmt(s.traffic.dl_rate_bps),
                        metrics._fmt(s.traffic.ul_rate_factor),
                        s.slot_pattern.name,
                        s.mux.mode,
                        s.mux.n_s_odd,
                        metrics._fmt(s.duration_s),
                        rel,
                    ]
                )
    print(f"wrote {manifest_path}")


def cmd_run(args) -> int:
    scn = _base_scenario(args)
    if args.seed is not None:
        scn = replace(scn, seed=args.seed)
    if args.no_strict:
        scn = replace(scn, strict=False)
    if args.no_warmup:
        scn = replace(scn, warmup_fraction=0.0)
    _run_points(scn, [{}], args.runs, _out_dir(args))
    return 0


def cmd_sweep(args) -> int:
    scn = _base_scenario(args)
    if args.seed is not None:
        scn = replace(scn, seed=args.seed)
    if args.no_strict:
        scn = replace(scn, strict=False)
    if args.no_warmup:
        scn = replace(scn, warmup_fraction=0.0)
    try:
        with open(args.grid) as fh:
            grid_spec = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read grid file {args.grid}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.grid}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if "points" in grid_spec:
        points = grid_spec["points"]
    elif "grid" in grid_spec:
        keys = sorted(grid_spec["grid"])
        points = [dict(zip(keys, combo)) for combo in itertools.product(*(grid_spec["grid"][k] for k in keys))]
    else:
        raise ConfigError("grid file needs a 'points' list or a 'grid' object")
    if not points:
        raise ConfigError("grid is empty")
    _run_points(scn, points, args.runs, _out_dir(args))
    return 0


def cmd_validate(args) -> int:
    scn = _base_scenario(args)
    layers = scn.layers()
    print(
        f"ok: {scn.name}: {len(scn.nodes)} nodes ({len(scn.donors())} donors), "
        f"max depth {scn.max_depth()}, pattern {scn.slot_pattern.name}, "
        f"mux {scn.mux.mode} n_s_odd={scn.mux.n_s_odd}, layers {dict(sorted(layers.items()))}"
    )
    return 0


def cmd_curves(args) -> int:
    if args.step <= 0 or args.d_max <= args.d_min:
        raise ConfigError("need step > 0 and d-max > d-min")
    rows = []
    d = args.d_min
    while d <= args.d_max + 1e-9:
        geom = channel.Geometry(d2d_m=d, h_tx_m=args.h_tx, h_rx_m=args.h_rx)
        row = [d]
        for model in ("free_space", "classical_two_ray", "modified_two_ray"):
            params = channel.ChannelParams(carrier_freq_ghz=args.freq, model=model)
            row.append(channel.path_loss_db(geom, params)[0])
        rows.append(row)
        d += args.step
    out = args.out or "curves.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["d_m", "free_space_db", "classical_two_ray_db", "modified_two_ray_db"])
        for row in rows:
            w.writerow([metrics._fmt(float(v)) for v in row])
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seahaul", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="simulate one configuration")
    _add_scenario_args(pr)
    pr.add_argument("--runs", type=int, default=1)
    pr.add_argument("--out", default=None, help=f"output directory (default ${ENV_OUT_DIR} or ./out)")
    pr.set_defaults(func=cmd_run)

    ps = sub.add_parser("sweep", help="run a parameter grid")
    _add_scenario_args(ps)
    ps.add_argument("--grid", required=True, help="JSON file with 'points' or 'grid'")
    ps.add_argument("--runs", type=int, default=1)
    ps.add_argument("--out", default=None)
    ps.set_defaults(func=cmd_sweep)

    pv = sub.add_parser("validate", help="lint a scenario")
    _add_scenario_args(pv)
    pv.set_defaults(func=cmd_validate)

    pc = sub.add_parser("curves", help="export path-loss curves")
    pc.add_argument("--freq", type=float, default=28.0, metavar="GHZ")
    pc.add_argument("--d-min", type=float, default=2000.0)
    pc.add_argument("--d-max", type=float, default=4000.0)
    pc.add_argument("--step", type=float, default=1.0)
    pc.add_argument("--h-tx", type=float, default=10.0)
    pc.add_argument("--h-rx", type=float, default=10.0)
    pc.add_argument("--out", default=None)
    pc.set_defaults(func=cmd_curves)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

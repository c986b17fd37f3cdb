"""Command line interface: ``tvws <subcommand> [options]``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import reassign as ra
from . import wsmap
from ._io import atomic_write
from .dataio import (
    RunConfig,
    TowerFileError,
    apply_setting,
    gen_sample_towers,
    load_config,
    parse_tower_csv,
    tower_csv,
)
from .geo import load_zones_geojson, make_grid
from .regulatory import METHODS, PRESETS, all_exclusion_zones, discrepancy_report, preset

SUBCOMMANDS = ("radii", "rasterize", "stats", "ccdf", "reassign", "render", "gen-sample")

# Row set of the zone-average / percent-area tables produced by ``stats --all-presets``.
TABLE_ROWS = (
    ("pollution-5", False), ("pollution-5", True),
    ("pollution-10", False), ("pollution-10", True),
    ("pollution-15", False), ("pollution-15", True),
    ("protection-1", False), ("protection-1", True),
    ("protection-0.1", False), ("protection-0.1", True),
    ("fcc", False),
)


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key=value config file (flags override it)")
    p.add_argument("--towers", type=Path, help="tower CSV")
    p.add_argument("--zones", type=Path, help="zone GeoJSON FeatureCollection")
    p.add_argument("--preset", choices=tuple(PRESETS))
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--resolution", type=float, help="grid resolution in degrees (default 0.05)")
    p.add_argument("--out", type=Path, help="output directory (default ./out)")
    p.add_argument("--no-adjacent", action="store_true", help="drop adjacent-channel exclusions")
    p.add_argument("--no-extrapolate", action="store_true",
                   help="fail instead of extrapolating Hata outside its nominal range")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a regulatory parameter, e.g. --set gamma_co_db=10")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tvws", description="TV white space estimation and channel reassignment")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("radii", help="print exclusion radii per tower")
    _common(p)
    p.add_argument("--discrepancy-report", action="store_true",
                   help="also print computed vs reference radii for each tower")

    p = sub.add_parser("rasterize", help="write the availability raster")
    _common(p)
    p.add_argument("--geojson", action="store_true", help="also write a GeoJSON cell grid")

    p = sub.add_parser("stats", help="write zone-average and percent-area tables")
    _common(p)
    p.add_argument("--all-presets", action="store_true",
                   help="one row per preset, with and without adjacent-channel constraints")

    p = sub.add_parser("ccdf", help="write the area CCDF of free channels")
    _common(p)

    p = sub.add_parser("reassign", help="compute a minimum-channel reassignment")
    _common(p)
    p.add_argument("--basis", choices=ra.BASES)
    p.add_argument("--min-separation", type=int)

    p = sub.add_parser("render", help="write a grayscale PNG of free-channel counts")
    _common(p)

    p = sub.add_parser("gen-sample", help="write a synthetic tower CSV")
    _common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int, default=254)
    p.add_argument("--weights", action="append", default=[], metavar="ZONE=WEIGHT",
                   help="relative tower density per zone (default: zone area)")
    p.add_argument("--output", type=Path, help="CSV path (default OUT/sample_towers.csv)")
    return ap


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for flag, key in (("towers", "towers"), ("zones", "zones"), ("preset", "preset"),
                      ("method", "method"), ("resolution", "resolution"), ("out", "out"),
                      ("basis", "basis"), ("min_separation", "min_separation"), ("seed", "seed")):
        v = getattr(args, flag, None)
        if v is not None:
            apply_setting(cfg, key, str(v))
    if args.no_adjacent:
        cfg.adjacent = False
    if args.no_extrapolate:
        cfg.extrapolate = False
    for item in args.set:
        k, sep, v = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        apply_setting(cfg, k, v)
    return cfg


def _header(cfg: RunConfig, method: str | None = None, **extra) -> list[str]:
    return wsmap.provenance_header(method or cfg.resolved_method(), cfg.preset, **extra)


def _raster(cfg: RunConfig, towers, zones, preset_name=None, adjacent=None):
    name = preset_name or cfg.preset
    method = preset(name)[0] if preset_name else cfg.resolved_method()
    params = replace(preset(name)[1], extrapolate=cfg.extrapolate, **cfg.param_overrides)
    grid = make_grid(zones, cfg.resolution_deg)
    return wsmap.availability_raster(grid, towers, params, method,
                                     cfg.adjacent if adjacent is None else adjacent, name)


def _flag_summary(zs) -> None:
    n_ext = sum(z.extrapolated for z in zs)
    n_clamp = sum(z.clamped for z in zs)
    if n_ext or n_clamp:
        print(f"note: {n_ext} radii extrapolated beyond Hata's nominal range, "
              f"{n_clamp} clamped to [0.01, 500] km", file=sys.stderr)


def cmd_radii(cfg: RunConfig, args) -> int:
    towers = parse_tower_csv(cfg.towers_path)
    method = cfg.resolved_method()
    params = cfg.params()
    zs = all_exclusion_zones(towers, params, method, cfg.adjacent)
    lines = _header(cfg)
    lines.append(f"{'tower_id':<16}{'kind':<15}{'channel':>8}{'radius_km':>12}  flags")
    for z in zs:
        flags = ",".join(f for f, on in (("extrapolated", z.extrapolated), ("clamped", z.clamped)) if on)
        lines.append(f"{z.tower_id:<16}{z.kind:<15}{z.channel:>8}{z.radius_km:>12.4f}  {flags or '-'}")
    print("\n".join(lines))
    if args.discrepancy_report:
        for t in towers:
            print()
            print(discrepancy_report(t, params), end="")
    _flag_summary(zs)
    return 0


def cmd_rasterize(cfg: RunConfig, args) -> int:
    r = _raster(cfg, parse_tower_csv(cfg.towers_path), load_zones_geojson(cfg.zones_path))
    wsmap.write_raster_csv(r, cfg.out_dir / "raster.csv")
    print(f"wrote {cfg.out_dir / 'raster.csv'}")
    if args.geojson:
        atomic_write(cfg.out_dir / "raster.geojson", wsmap.raster_geojson(r))
        print(f"wrote {cfg.out_dir / 'raster.geojson'}")
    return 0


def cmd_stats(cfg: RunConfig, args) -> int:
    towers = parse_tower_csv(cfg.towers_path)
    zones = load_zones_geojson(cfg.zones_path)
    names = [z.name for z in zones]
    if args.all_presets:
        rows = []
        for name, adj in TABLE_ROWS:
            r = _raster(cfg, towers, zones, name, adj)
            rows.append((f"{name}{'+adj' if adj else ''}", r))
    else:
        r = _raster(cfg, towers, zones)
        rows = [(f"{cfg.preset}{'+adj' if cfg.adjacent else ''}", r)]
    averages, percents = wsmap.stats_tables(rows, names)
    atomic_write(cfg.out_dir / "zone_averages.csv", averages)
    atomic_write(cfg.out_dir / "percent_area.csv", percents)
    print(averages, end="")
    print(percents, end="")
    return 0


def cmd_ccdf(cfg: RunConfig, args) -> int:
    zones = load_zones_geojson(cfg.zones_path)
    r = _raster(cfg, parse_tower_csv(cfg.towers_path), zones)
    text = wsmap.ccdf_csv(r, [z.name for z in zones])
    atomic_write(cfg.out_dir / "ccdf.csv", text)
    print(text, end="")
    return 0


def cmd_reassign(cfg: RunConfig, args) -> int:
    towers = parse_tower_csv(cfg.towers_path)
    _, a = ra.reassign_towers(towers, cfg.params(), cfg.basis, cfg.min_separation)
    head = _header(cfg, method="reassign", basis=cfg.basis, min_separation=cfg.min_separation)
    atomic_write(cfg.out_dir / "assignment.csv", ra.assignment_csv(towers, a, head))
    s = ra.summary(towers, a, preset=cfg.preset, method="reassign", basis=cfg.basis,
                   min_separation=cfg.min_separation)
    atomic_write(cfg.out_dir / "reassign_summary.json", ra.summary_json(s))
    for z, info in s["zones"].items():
        print(f"zone {z}: {info['distinct_before']} -> {info['distinct_after']} channels")
    print(f"distinct channels before: {s['distinct_before']}")
    print(f"distinct channels: {a.distinct_channels_used}")
    print(f"violations: {len(a.violations)}")
    return 0


def cmd_render(cfg: RunConfig, args) -> int:
    r = _raster(cfg, parse_tower_csv(cfg.towers_path), load_zones_geojson(cfg.zones_path))
    wsmap.render_png(r, cfg.out_dir / "availability.png")
    print(f"wrote {cfg.out_dir / 'availability.png'}")
    return 0


def cmd_gen_sample(cfg: RunConfig, args) -> int:
    zones = load_zones_geojson(cfg.zones_path)
    weights = None
    if args.weights:
        weights = {}
        for item in args.weights:
            k, sep, v = item.partition("=")
            if not sep:
                raise UsageError(f"--weights expects ZONE=WEIGHT, got {item!r}")
            weights[k] = float(v)
    towers = gen_sample_towers(cfg.seed, zones, args.count, weights)
    out = args.output or cfg.out_dir / "sample_towers.csv"
    atomic_write(out, tower_csv(towers, [f"# seed={cfg.seed}", f"# count={args.count}"]))
    print(f"wrote {len(towers)} towers to {out}")
    return 0


_COMMANDS = {
    "radii": cmd_radii, "rasterize": cmd_rasterize, "stats": cmd_stats, "ccdf": cmd_ccdf,
    "reassign": cmd_reassign, "render": cmd_render, "gen-sample": cmd_gen_sample,
}


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = _config(args)
        cfg.validate(need_towers=args.command != "gen-sample",
                     need_zones=args.command not in ("radii", "reassign"))
    except (UsageError, ValueError, FileNotFoundError) as e:
        print(f"tvws {args.command}: error: {e}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg, args)
    except (TowerFileError, FileNotFoundError) as e:
        print(f"tvws {args.command}: error: {e}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as e:
        print(f"tvws {args.command}: error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

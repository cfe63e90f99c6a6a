"""Batch entry points: validate | run | hotspots | site | impact | serve.

Exit codes: 0 success, 1 validation failure, 2 solver error, 64 usage.
Machine-readable outputs land in the output directory; stdout carries a
short summary (or JSON with --format json). Flags override config-file
values, and the effective configuration is echoed next to the outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .assignment import DisconnectedODError, LinkCostModel
from .coupled import CoupledConfig, read_snapshot, run_coupled, write_snapshot
from .hotspots import build_timeline
from .impact import diff_states, write_impact
from .ingest import ParseError, load_scenario
from .model import validate_scenario
from .powerflow import StructurallyInfeasibleError, VoltageModel
from .serialize import (
    impact_to_dict,
    scenario_summary,
    solution_to_dict,
    timeline_to_dict,
    validation_to_dict,
)
from .siting import GaConfig, InsufficientCandidatesError, run_siting

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 64, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="chargeplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out_required=True):
        p.add_argument("--scenario", required=True, help="scenario directory")
        p.add_argument("--out", required=out_required, help="output directory")
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--format", choices=("json", "text"), default="text")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tol", type=float, default=None, help="UE relative gap")
        p.add_argument("--max-iter", type=int, default=None)

    p = sub.add_parser("validate", help="check scenario invariants")
    common(p)

    p = sub.add_parser("run", help="solve the coupled model, emit a snapshot")
    common(p)

    p = sub.add_parser("hotspots", help="detect and link traffic hotspots")
    common(p)
    p.add_argument("--top", type=int, default=None, help="hotspots per slice")

    p = sub.add_parser("site", help="search for new station sites")
    common(p)
    p.add_argument("--stations", type=int, default=None, help="new station count")
    p.add_argument("--chargers", default=None, help="charger range LO:HI")
    p.add_argument("--children", type=int, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--weights", default=None, help="w1,w2,w3")

    p = sub.add_parser("impact", help="diff two snapshots")
    common(p, out_required=True)
    p.add_argument("--baseline", required=True, help="baseline snapshot file")
    p.add_argument("--deployed", required=True, help="deployed snapshot file")
    p.add_argument("--road-threshold", type=float, default=None)
    p.add_argument("--bus-threshold", type=float, default=None)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--scenario", required=True)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--results", default=None, help="results cache directory")
    p.add_argument("--ui-dist", default=None, help="static UI bundle to serve")
    p.add_argument("--workers", type=int, default=1, help="parallel heavy jobs")
    p.add_argument("--config", help="JSON config file")
    return parser


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError("bad-config", f"config file {path}: {exc}") from exc


def _coupled_config(raw: dict, args) -> CoupledConfig:
    section = dict(raw.get("coupled", {}))
    cost = LinkCostModel(
        alpha=section.pop("alpha", 0.15), beta=section.pop("beta", 4.0)
    )
    voltage = VoltageModel(
        drop_coefficient=section.pop("drop_coefficient", VoltageModel().drop_coefficient)
    )
    config = CoupledConfig(cost=cost, voltage=voltage, **section)
    if getattr(args, "tol", None) is not None:
        config = replace(config, ue_tol=args.tol)
    if getattr(args, "max_iter", None) is not None:
        config = replace(config, ue_max_iter=args.max_iter)
    if getattr(args, "threads", None):
        config = replace(config, threads=args.threads)
    return config


def _ga_config(raw: dict, args) -> GaConfig:
    section = dict(raw.get("ga", {}))
    if "chargers" in section:
        section["charger_min"], section["charger_max"] = section.pop("chargers")
    if "weights" in section:
        w = section.pop("weights")
        section["w_coverage"], section["w_service"], section["w_investment"] = w
    if "stations" in section:
        section["new_station_count"] = section.pop("stations")
    if "children" in section:
        section["children_per_iteration"] = section.pop("children")
    if args.stations is not None:
        section["new_station_count"] = args.stations
    if args.chargers is not None:
        lo, _, hi = args.chargers.partition(":")
        try:
            section["charger_min"], section["charger_max"] = int(lo), int(hi)
        except ValueError:
            raise ParseError("bad-config", f"--chargers wants LO:HI, got {args.chargers!r}")
    if args.children is not None:
        section["children_per_iteration"] = args.children
    if args.iterations is not None:
        section["iterations"] = args.iterations
    if args.weights is not None:
        try:
            w1, w2, w3 = (float(x) for x in args.weights.split(","))
        except ValueError:
            raise ParseError("bad-config", f"--weights wants w1,w2,w3, got {args.weights!r}")
        section["w_coverage"], section["w_service"], section["w_investment"] = w1, w2, w3
    if args.seed is not None:
        section["seed"] = args.seed
    return GaConfig(**section)


def _echo_config(out_dir: Path, coupled: CoupledConfig | None, ga: GaConfig | None,
                 extra: dict | None = None) -> None:
    payload: dict = dict(extra or {})
    if coupled is not None:
        payload["coupled"] = {
            "alpha": coupled.cost.alpha,
            "beta": coupled.cost.beta,
            "ue_tol": coupled.ue_tol,
            "ue_max_iter": coupled.ue_max_iter,
            "service_radius": coupled.service_radius,
            "slice_hours": coupled.slice_hours,
            "drop_coefficient": coupled.voltage.drop_coefficient,
            "threads": coupled.threads,
        }
    if ga is not None:
        payload["ga"] = {
            "children": ga.children_per_iteration,
            "iterations": ga.iterations,
            "stations": ga.new_station_count,
            "chargers": [ga.charger_min, ga.charger_max],
            "weights": [ga.w_coverage, ga.w_service, ga.w_investment],
            "seed": ga.seed,
            "elite": ga.elite,
            "mutation_rate": ga.mutation_rate,
            "fixed_cost": ga.fixed_cost,
            "unit_cost": ga.unit_cost,
        }
    (out_dir / "effective_config.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _say(args, text_line: str, payload: dict) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text_line)


def _validate(args) -> int:
    scenario = load_scenario(args.scenario)
    report = validate_scenario(
        scenario.road, scenario.od, list(scenario.stations), scenario.grid,
        scenario.coupling,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "violations.json").write_text(
        json.dumps(validation_to_dict(report), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    summary = scenario_summary(scenario)
    summary["ok"] = report.ok
    _say(args, f"validation {'ok' if report.ok else 'FAILED'} "
               f"({len(report.violations)} violations)", summary)
    return EXIT_OK if report.ok else EXIT_VALIDATION


def _require_valid(scenario) -> None:
    report = validate_scenario(
        scenario.road, scenario.od, list(scenario.stations), scenario.grid,
        scenario.coupling,
    )
    if not report.ok:
        raise ParseError("invalid-scenario", f"violations: {report.codes()}")


def _run(args) -> int:
    scenario = load_scenario(args.scenario)
    _require_valid(scenario)
    config = _coupled_config(_load_config_file(args.config), args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    state = run_coupled(scenario, scenario.stations, config)
    (out_dir / "state.snapshot").write_text(write_snapshot(state), encoding="utf-8")
    _echo_config(out_dir, config, None)
    gaps = {s.slice: s.total_demand() for s in state.slices}
    _say(args, f"solved {len(state.slices)} slices -> {out_dir / 'state.snapshot'}",
         {"slices": list(gaps)})
    return EXIT_OK


def _hotspots(args) -> int:
    scenario = load_scenario(args.scenario)
    _require_valid(scenario)
    raw = _load_config_file(args.config)
    config = _coupled_config(raw, args)
    section = raw.get("hotspots", {})
    top = args.top if args.top is not None else section.get("top", 5)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    state = run_coupled(scenario, scenario.stations, config)
    timeline = build_timeline(
        state, scenario.road, scenario.stations, top,
        resolution=section.get("resolution", 1.0),
        link_threshold=section.get("link_threshold", 0.1),
    )
    (out_dir / "hotspots.json").write_text(
        json.dumps(timeline_to_dict(timeline), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    _echo_config(out_dir, config, None, {"hotspots": {"top": top}})
    _say(args, f"{len(timeline.hotspots)} hotspots, {len(timeline.links)} links "
               f"-> {out_dir / 'hotspots.json'}",
         {"hotspots": len(timeline.hotspots), "links": len(timeline.links)})
    return EXIT_OK


def _site(args) -> int:
    scenario = load_scenario(args.scenario)
    _require_valid(scenario)
    raw = _load_config_file(args.config)
    coupled = _coupled_config(raw, args)
    ga = _ga_config(raw, args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    baseline = run_coupled(scenario, scenario.stations, coupled)
    (out_dir / "baseline.snapshot").write_text(write_snapshot(baseline), encoding="utf-8")
    results = run_siting(scenario, ga, coupled, baseline=baseline)
    payload = {"solutions": []}
    for rank, (sol, state) in enumerate(results, start=1):
        sid = f"plan-{rank}"
        report = diff_states(baseline, state)
        (out_dir / f"{sid}.snapshot").write_text(write_snapshot(state), encoding="utf-8")
        (out_dir / f"{sid}.impact").write_text(write_impact(report), encoding="utf-8")
        payload["solutions"].append({"id": sid, **solution_to_dict(sol)})
    (out_dir / "solutions.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    _echo_config(out_dir, coupled, ga)
    _say(args, f"{len(results)} solutions -> {out_dir / 'solutions.json'}", payload)
    return EXIT_OK


def _impact(args) -> int:
    raw = _load_config_file(args.config)
    section = raw.get("impact", {})
    road_t = args.road_threshold if args.road_threshold is not None else section.get(
        "road_threshold", 1.0)
    bus_t = args.bus_threshold if args.bus_threshold is not None else section.get(
        "bus_threshold", 1.0)
    baseline = read_snapshot(Path(args.baseline).read_text(encoding="utf-8"))
    deployed = read_snapshot(Path(args.deployed).read_text(encoding="utf-8"))
    report = diff_states(baseline, deployed, road_t, bus_t)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "impact.impact").write_text(write_impact(report), encoding="utf-8")
    (out_dir / "impact.json").write_text(
        json.dumps(impact_to_dict(report), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    _echo_config(out_dir, None, None,
                 {"impact": {"road_threshold": road_t, "bus_threshold": bus_t}})
    total_roads = sum(s.affected_road_count for s in report.slices)
    total_buses = sum(s.affected_bus_count for s in report.slices)
    _say(args, f"impact: {total_roads} road and {total_buses} bus threshold crossings "
               f"-> {out_dir / 'impact.impact'}",
         {"affected_roads": total_roads, "affected_buses": total_buses})
    return EXIT_OK


def _serve(args) -> int:
    import uvicorn

    from .service import create_app

    raw = _load_config_file(args.config)
    config_args = argparse.Namespace(tol=None, max_iter=None, threads=None, seed=None)
    coupled = _coupled_config(raw, config_args)
    coupled = replace(coupled, retain_paths=True)
    app = create_app(
        args.scenario,
        results_dir=args.results,
        config=coupled,
        ui_dist=args.ui_dist,
        workers=args.workers,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--serve" in argv:  # accepted alias: --serve --port P --scenario DIR
        argv = ["serve"] + [a for a in argv if a != "--serve"]
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE

    handlers = {
        "validate": _validate,
        "run": _run,
        "hotspots": _hotspots,
        "site": _site,
        "impact": _impact,
        "serve": _serve,
    }
    try:
        return handlers[args.command](args)
    except (ParseError, FileNotFoundError, ValueError) as exc:
        if isinstance(exc, (DisconnectedODError, StructurallyInfeasibleError)):
            print(f"solver error: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RuntimeError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

"""JSON views of domain objects, shared by the CLI outputs and the API.

Dictionaries here are the wire format: every field the UI renders comes
from one of these shapes, and the CLI writes the same shapes to disk so
outputs can be parsed back losslessly.
"""

from __future__ import annotations

from typing import Any

from .hotspots import Hotspot, HotspotLink, HotspotTimeline
from .impact import ImpactReport, SliceImpact
from .ingest import Scenario
from .model import SliceState, TimeSlicedState, ValidationReport, Violation
from .siting import ObjectiveBreakdown, SitingSolution


def validation_to_dict(report: ValidationReport) -> dict[str, Any]:
    return {
        "ok": report.ok,
        "violations": [
            {"code": v.code, "entity": v.entity, "message": v.message}
            for v in report.violations
        ],
    }


def validation_from_dict(raw: dict[str, Any]) -> ValidationReport:
    return ValidationReport(
        tuple(
            Violation(v["code"], v["entity"], v["message"]) for v in raw["violations"]
        )
    )


def scenario_summary(scenario: Scenario) -> dict[str, Any]:
    return {
        "nodes": len(scenario.road.nodes),
        "links": len(scenario.road.links),
        "od_entries": len(scenario.od.entries),
        "slices": list(scenario.od.slices),
        "stations": len(scenario.stations),
        "buses": len(scenario.grid.buses),
        "grid_lines": len(scenario.grid.lines),
        "ev_share": scenario.od.ev_share,
        "charge_propensity": scenario.coupling.charge_propensity,
        "energy_per_vehicle": scenario.coupling.energy_per_vehicle,
        "road": road_geometry(scenario),
    }


def road_geometry(scenario: Scenario) -> dict[str, Any]:
    """Node coordinates and link endpoints, enough for the map to draw."""
    return {
        "nodes": [
            {"id": n.id, "lat": n.lat, "lon": n.lon, "has_station": n.has_station}
            for n in scenario.road.nodes
        ],
        "links": [
            {
                "id": l.id,
                "from": l.from_node,
                "to": l.to_node,
                "capacity": l.capacity,
                "length": l.length,
                "free_flow_time": l.free_flow_time,
            }
            for l in scenario.road.links
        ],
    }


def slice_to_dict(s: SliceState) -> dict[str, Any]:
    return {
        "slice": s.slice,
        "link_volume": {str(k): v for k, v in sorted(s.link_volume.items())},
        "node_demand": {str(k): v for k, v in sorted(s.node_demand.items())},
        "node_assignment": {str(k): v for k, v in sorted(s.node_assignment.items())},
        "station_assigned": dict(sorted(s.station_assigned.items())),
        "station_served": dict(sorted(s.station_served.items())),
        "bus_load": {str(k): v for k, v in sorted(s.bus_load.items())},
        "bus_voltage": {str(k): v for k, v in sorted(s.bus_voltage.items())},
        "bus_price": {str(k): v for k, v in sorted(s.bus_price.items())},
        "station_voltage": dict(sorted(s.station_voltage.items())),
        "station_price": dict(sorted(s.station_price.items())),
        "total_demand": s.total_demand(),
        "unserved_demand": s.unserved_demand(),
    }


def timeline_to_dict(timeline: HotspotTimeline) -> dict[str, Any]:
    return {
        "hotspots": [
            {
                "id": h.id,
                "slice": h.slice,
                "nodes": sorted(h.nodes),
                "links": list(h.links),
                "avg_volume": h.avg_volume,
                "area_size": h.area_size,
                "demand_share": h.demand_share,
                "served_share": h.served_share,
                "rank": h.rank,
            }
            for h in timeline.hotspots
        ],
        "links": [
            {"from": l.from_id, "to": l.to_id, "similarity": l.similarity}
            for l in timeline.links
        ],
    }


def timeline_from_dict(raw: dict[str, Any]) -> HotspotTimeline:
    return HotspotTimeline(
        hotspots=tuple(
            Hotspot(
                id=h["id"],
                slice=h["slice"],
                nodes=frozenset(h["nodes"]),
                links=tuple(h["links"]),
                avg_volume=h["avg_volume"],
                area_size=h["area_size"],
                demand_share=h["demand_share"],
                served_share=h["served_share"],
                rank=h["rank"],
            )
            for h in raw["hotspots"]
        ),
        links=tuple(
            HotspotLink(l["from"], l["to"], l["similarity"]) for l in raw["links"]
        ),
    )


def solution_to_dict(sol: SitingSolution) -> dict[str, Any]:
    return {
        "placements": [{"node": n, "chargers": x} for n, x in sol.placements],
        "objective": sol.objective,
        "coverage": sol.breakdown.coverage,
        "service_time": sol.breakdown.service_time,
        "investment": sol.breakdown.investment,
    }


def solution_from_dict(raw: dict[str, Any]) -> SitingSolution:
    return SitingSolution(
        placements=tuple((p["node"], p["chargers"]) for p in raw["placements"]),
        objective=raw["objective"],
        breakdown=ObjectiveBreakdown(
            coverage=raw["coverage"],
            service_time=raw["service_time"],
            investment=raw["investment"],
        ),
    )


def impact_to_dict(report: ImpactReport) -> dict[str, Any]:
    return {
        "road_threshold": report.road_threshold,
        "bus_threshold": report.bus_threshold,
        "slices": [
            {
                "slice": s.slice,
                "coverage": s.coverage,
                "affected_road_count": s.affected_road_count,
                "affected_bus_count": s.affected_bus_count,
                "mean_abs_road_delta": s.mean_abs_road_delta,
                "mean_abs_voltage_delta": s.mean_abs_voltage_delta,
                "road_delta": {str(k): v for k, v in sorted(s.road_delta.items())},
                "voltage_delta": {str(k): v for k, v in sorted(s.voltage_delta.items())},
            }
            for s in report.slices
        ],
    }


def impact_from_dict(raw: dict[str, Any]) -> ImpactReport:
    return ImpactReport(
        slices=tuple(
            SliceImpact(
                slice=s["slice"],
                road_delta={int(k): v for k, v in s["road_delta"].items()},
                voltage_delta={int(k): v for k, v in s["voltage_delta"].items()},
                coverage=s["coverage"],
                affected_road_count=s["affected_road_count"],
                affected_bus_count=s["affected_bus_count"],
                mean_abs_road_delta=s["mean_abs_road_delta"],
                mean_abs_voltage_delta=s["mean_abs_voltage_delta"],
            )
            for s in raw["slices"]
        ),
        road_threshold=raw["road_threshold"],
        bus_threshold=raw["bus_threshold"],
    )


def stations_table(scenario: Scenario, state: TimeSlicedState) -> list[dict[str, Any]]:
    """Rows for the station table: size, mean coverage rate, voltage band."""
    rows = []
    n = len(state.slices)
    for st in sorted(scenario.stations, key=lambda s: s.id):
        coverage = 0.0
        v_lo, v_hi = None, None
        for s in state.slices:
            total = s.total_demand()
            if total > 0:
                coverage += min(s.station_served.get(st.id, 0.0) / total, 1.0)
            v = s.station_voltage.get(st.id)
            if v is not None:
                v_lo = v if v_lo is None else min(v_lo, v)
                v_hi = v if v_hi is None else max(v_hi, v)
        node = scenario.road.node_by_id()[st.node]
        rows.append(
            {
                "id": st.id,
                "name": st.name,
                "node": st.node,
                "lat": node.lat,
                "lon": node.lon,
                "chargers": st.chargers,
                "is_existing": st.is_existing,
                "coverage": coverage / n if n else 0.0,
                "voltage_min": v_lo,
                "voltage_max": v_hi,
            }
        )
    return rows


def station_series(state: TimeSlicedState, station_id: str) -> dict[str, Any]:
    """Per-slice served share, demand and voltage for one station."""
    series = []
    for s in state.slices:
        total = s.total_demand()
        series.append(
            {
                "slice": s.slice,
                "assigned_kwh": s.station_assigned.get(station_id, 0.0),
                "served_kwh": s.station_served.get(station_id, 0.0),
                "coverage": (
                    min(s.station_served.get(station_id, 0.0) / total, 1.0)
                    if total > 0
                    else 0.0
                ),
                "voltage": s.station_voltage.get(station_id),
            }
        )
    return {"station": station_id, "series": series}

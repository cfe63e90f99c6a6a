"""Slice pipeline: equilibrium traffic -> charging demand -> stations -> OPF.

Coupling is one-way inside a slice (traffic feeds the grid; prices do not
feed back into routing). Slices are independent, so they may run on a
thread pool; assembly merges them in label order, which keeps outputs
bit-identical whatever the worker count.
"""

from __future__ import annotations

import heapq
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .assignment import AssignmentResult, LinkCostModel, accrue_demand, solve_ue
from .ingest import ParseError, Scenario
from .model import (
    UNSERVED,
    ChargingStation,
    RoadNetwork,
    SliceState,
    TimeSlicedState,
)
from .powerflow import VoltageModel, solve_opf

SNAPSHOT_VERSION = "1"


@dataclass(frozen=True)
class CoupledConfig:
    cost: LinkCostModel = field(default_factory=LinkCostModel)
    ue_tol: float = 1e-4
    ue_max_iter: int = 500
    service_radius: float = 5.0          # km of road distance to a station
    slice_hours: float = 1.0
    voltage: VoltageModel = field(default_factory=VoltageModel)
    slices: tuple[str, ...] | None = None  # None: every slice in the OD data
    retain_paths: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.service_radius <= 0:
            raise ValueError(f"service_radius must be > 0, got {self.service_radius}")
        if self.slice_hours <= 0:
            raise ValueError(f"slice_hours must be > 0, got {self.slice_hours}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")


@dataclass(frozen=True)
class DemandAssignment:
    """Nearest-station routing of one slice's node demand."""

    node_to_station: dict[int, str]     # demand node -> station id or UNSERVED
    station_kwh: dict[str, float]
    unserved_kwh: float


def road_distances_to_station(
    road: RoadNetwork, station_node: int
) -> dict[int, float]:
    """km of shortest directed road path from every node to station_node."""
    # Dijkstra over reversed links so one pass covers all origins.
    radj: dict[int, list[tuple[int, float]]] = {n.id: [] for n in road.nodes}
    for link in road.links:
        radj[link.to_node].append((link.from_node, link.length))
    dist: dict[int, float] = {}
    heap: list[tuple[float, int]] = [(0.0, station_node)]
    while heap:
        d, node = heapq.heappop(heap)
        if node in dist:
            continue
        dist[node] = d
        for prev, w in radj[node]:
            if prev not in dist:
                heapq.heappush(heap, (d + w, prev))
    return dist


def assign_demand(
    road: RoadNetwork,
    node_demand: dict[int, float],
    stations: tuple[ChargingStation, ...] | list[ChargingStation],
    service_radius: float,
) -> DemandAssignment:
    """Route each demand node to its nearest in-radius station.

    Ties go to the lowest station id; demand with no station in reach is
    kept as unserved rather than redistributed.
    """
    by_station = {
        st.id: road_distances_to_station(road, st.node)
        for st in sorted(stations, key=lambda s: s.id)
    }
    node_to_station: dict[int, str] = {}
    station_kwh: dict[str, float] = {st.id: 0.0 for st in stations}
    unserved = 0.0
    for node in sorted(node_demand):
        demand = node_demand[node]
        if demand <= 0.0:
            continue
        best: tuple[float, str] | None = None
        for sid in sorted(by_station):
            d = by_station[sid].get(node)
            if d is None or d > service_radius:
                continue
            if best is None or (d, sid) < best:
                best = (d, sid)
        if best is None:
            node_to_station[node] = UNSERVED
            unserved += demand
        else:
            node_to_station[node] = best[1]
            station_kwh[best[1]] += demand
    return DemandAssignment(node_to_station, station_kwh, unserved)


def run_coupled(
    scenario: Scenario,
    stations: tuple[ChargingStation, ...] | list[ChargingStation],
    config: CoupledConfig = CoupledConfig(),
) -> TimeSlicedState:
    """Solve every slice and assemble the full time-sliced state."""
    labels = list(config.slices) if config.slices else list(scenario.od.slices)
    station_list = tuple(sorted(stations, key=lambda s: s.id))

    def one_slice(label: str) -> SliceState:
        return _solve_slice(scenario, station_list, config, label)

    if config.threads > 1 and len(labels) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            slices = list(pool.map(one_slice, labels))
    else:
        slices = [one_slice(label) for label in labels]
    return TimeSlicedState(slices=tuple(slices))


def _solve_slice(
    scenario: Scenario,
    stations: tuple[ChargingStation, ...],
    config: CoupledConfig,
    label: str,
) -> SliceState:
    result: AssignmentResult = solve_ue(
        scenario.road,
        scenario.od.for_slice(label),
        cost=config.cost,
        tol=config.ue_tol,
        max_iter=config.ue_max_iter,
        retain_paths=config.retain_paths,
    )
    node_demand = accrue_demand(
        result, scenario.road, scenario.coupling, scenario.od.ev_share
    )
    assignment = assign_demand(
        scenario.road, node_demand, stations, config.service_radius
    )

    station_bus = {st.id: scenario.coupling.node_to_bus[st.node] for st in stations}
    charging_mw: dict[int, float] = {}
    for sid, kwh in assignment.station_kwh.items():
        mw = kwh / 1000.0 / config.slice_hours  # kWh over the slice -> average MW
        charging_mw[station_bus[sid]] = charging_mw.get(station_bus[sid], 0.0) + mw
    opf = solve_opf(scenario.grid, charging_mw, config.voltage)

    station_served = {
        sid: kwh * opf.served_fraction.get(station_bus[sid], 1.0)
        for sid, kwh in assignment.station_kwh.items()
    }
    return SliceState(
        slice=label,
        link_volume=dict(result.link_volume),
        node_demand=node_demand,
        node_assignment=assignment.node_to_station,
        station_assigned=assignment.station_kwh,
        station_served=station_served,
        bus_load=opf.bus_load,
        bus_voltage=opf.bus_voltage,
        bus_price=opf.bus_price,
        station_voltage={
            sid: opf.bus_voltage[bus] for sid, bus in station_bus.items()
        },
        station_price={
            sid: opf.bus_price[bus] for sid, bus in station_bus.items()
        },
    )


def station_coverage(state: TimeSlicedState, station_id: str) -> float:
    """Mean over slices of served share; empty slices count as zero."""
    known = {sid for s in state.slices for sid in s.station_assigned}
    if station_id not in known:
        raise KeyError(f"unknown station {station_id!r}")
    if not state.slices:
        return 0.0
    acc = 0.0
    for s in state.slices:
        total = s.total_demand()
        if total > 0:
            acc += min(s.station_served.get(station_id, 0.0) / total, 1.0)
    return acc / len(state.slices)


# ---------------------------------------------------------------------------
# Snapshot file (line oriented, schema versioned)
# ---------------------------------------------------------------------------

def write_snapshot(state: TimeSlicedState) -> str:
    """Serialize deterministically: slices in order, ids ascending."""
    out = io.StringIO()
    out.write(f"chargeplan-snapshot {SNAPSHOT_VERSION}\n")
    for s in state.slices:
        out.write(f"slice {s.slice}\n")
        for lid in sorted(s.link_volume):
            out.write(f"link_volume {lid} {s.link_volume[lid]!r}\n")
        for nid in sorted(s.node_demand):
            out.write(f"node_demand {nid} {s.node_demand[nid]!r}\n")
        for nid in sorted(s.node_assignment):
            out.write(f"node_assignment {nid} {s.node_assignment[nid]}\n")
        for sid in sorted(s.station_assigned):
            out.write(f"station_assigned {sid} {s.station_assigned[sid]!r}\n")
        for sid in sorted(s.station_served):
            out.write(f"station_served {sid} {s.station_served[sid]!r}\n")
        for bid in sorted(s.bus_load):
            out.write(f"bus_load {bid} {s.bus_load[bid]!r}\n")
        for bid in sorted(s.bus_voltage):
            out.write(f"bus_voltage {bid} {s.bus_voltage[bid]!r}\n")
        for bid in sorted(s.bus_price):
            out.write(f"bus_price {bid} {s.bus_price[bid]!r}\n")
        for sid in sorted(s.station_voltage):
            out.write(f"station_voltage {sid} {s.station_voltage[sid]!r}\n")
        for sid in sorted(s.station_price):
            out.write(f"station_price {sid} {s.station_price[sid]!r}\n")
        out.write("end_slice\n")
    return out.getvalue()


def read_snapshot(text: str | bytes) -> TimeSlicedState:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("invalid-utf8", str(exc)) from exc
    lines = text.splitlines()
    if not lines or not lines[0].startswith("chargeplan-snapshot"):
        raise ParseError("syntax", "missing snapshot header")
    version = lines[0].split()[-1]
    if version != SNAPSHOT_VERSION:
        raise ParseError(
            "unsupported-version", f"snapshot version {version!r}, want {SNAPSHOT_VERSION!r}"
        )
    slices: list[SliceState] = []
    current: SliceState | None = None
    for no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "slice":
            if current is not None:
                raise ParseError("syntax", "nested slice block", no)
            if len(parts) != 2:
                raise ParseError("syntax", "slice needs a label", no)
            current = SliceState(
                slice=parts[1],
                link_volume={},
                node_demand={},
                node_assignment={},
                station_assigned={},
                station_served={},
                bus_load={},
                bus_voltage={},
                bus_price={},
                station_voltage={},
                station_price={},
            )
            continue
        if kind == "end_slice":
            if current is None:
                raise ParseError("syntax", "end_slice outside a slice block", no)
            slices.append(current)
            current = None
            continue
        if current is None:
            raise ParseError("syntax", f"row outside a slice block: {line!r}", no)
        if len(parts) != 3:
            raise ParseError("syntax", f"expected 'kind key value': {line!r}", no)
        _, key, value = parts
        try:
            if kind == "link_volume":
                current.link_volume[int(key)] = float(value)
            elif kind == "node_demand":
                current.node_demand[int(key)] = float(value)
            elif kind == "node_assignment":
                current.node_assignment[int(key)] = value
            elif kind == "station_assigned":
                current.station_assigned[key] = float(value)
            elif kind == "station_served":
                current.station_served[key] = float(value)
            elif kind == "bus_load":
                current.bus_load[int(key)] = float(value)
            elif kind == "bus_voltage":
                current.bus_voltage[int(key)] = float(value)
            elif kind == "bus_price":
                current.bus_price[int(key)] = float(value)
            elif kind == "station_voltage":
                current.station_voltage[key] = float(value)
            elif kind == "station_price":
                current.station_price[key] = float(value)
            else:
                raise ParseError("syntax", f"unknown row kind {kind!r}", no)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError("bad-number", str(exc), no) from exc
    if current is not None:
        raise ParseError("syntax", "snapshot ends inside a slice block")
    return TimeSlicedState(slices=tuple(slices))


def with_extra_stations(
    scenario: Scenario, extra: list[ChargingStation]
) -> tuple[Scenario, tuple[ChargingStation, ...]]:
    """Scenario plus proposed stations, for post-deployment re-solves."""
    existing_nodes = {st.node for st in scenario.stations}
    for st in extra:
        if st.node in existing_nodes:
            raise ValueError(f"station {st.id!r} lands on an occupied node {st.node}")
    merged = tuple(scenario.stations) + tuple(extra)
    return replace(scenario, stations=merged), merged

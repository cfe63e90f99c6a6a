"""Shared domain types for the coupled road/grid siting engine.

All types are plain frozen dataclasses, immutable after construction and
safe to share across threads. Mutable-looking fields (dicts) are owned by
the instance and must not be written to by callers.
"""

from __future__ import annotations

from dataclasses import dataclass


# ---------------------------------------------------------------------------
# Road network
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoadNode:
    id: int
    lat: float
    lon: float
    has_station: bool = False


@dataclass(frozen=True)
class RoadLink:
    """Directed road segment; a two-way street is two links."""

    id: int
    from_node: int
    to_node: int
    free_flow_time: float  # minutes
    capacity: float        # vehicles per slice
    length: float          # km


@dataclass(frozen=True)
class RoadNetwork:
    nodes: tuple[RoadNode, ...]
    links: tuple[RoadLink, ...]

    def node_ids(self) -> list[int]:
        return [n.id for n in self.nodes]

    def node_by_id(self) -> dict[int, RoadNode]:
        return {n.id: n for n in self.nodes}

    def link_by_id(self) -> dict[int, RoadLink]:
        return {l.id: l for l in self.links}

    def out_links(self) -> dict[int, list[RoadLink]]:
        """Adjacency by origin node, link order preserved from the file."""
        adj: dict[int, list[RoadLink]] = {n.id: [] for n in self.nodes}
        for link in self.links:
            adj[link.from_node].append(link)
        return adj

    def in_links(self) -> dict[int, list[RoadLink]]:
        adj: dict[int, list[RoadLink]] = {n.id: [] for n in self.nodes}
        for link in self.links:
            adj[link.to_node].append(link)
        return adj


# ---------------------------------------------------------------------------
# Travel demand
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ODEntry:
    origin: int
    destination: int
    slice: str
    trips: float


@dataclass(frozen=True)
class ODMatrix:
    """Trip table keyed by (origin, destination, slice).

    ev_share is the fraction of trips made by EVs; the source data carries
    no such split, so it arrives as explicit scenario configuration.
    """

    slices: tuple[str, ...]
    entries: tuple[ODEntry, ...]
    ev_share: float

    def for_slice(self, label: str) -> list[ODEntry]:
        return [e for e in self.entries if e.slice == label]


# ---------------------------------------------------------------------------
# Stations and grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChargingStation:
    id: str
    name: str
    node: int          # road node the station is pinned to
    chargers: int
    is_existing: bool = True


@dataclass(frozen=True)
class Bus:
    id: int
    base_load: float          # MW
    v_min: float              # per-unit
    v_max: float              # per-unit
    is_generator: bool = False
    gen_min: float = 0.0      # MW
    gen_max: float = 0.0      # MW
    gen_cost: float = 0.0     # $/MWh, linear


@dataclass(frozen=True)
class Line:
    from_bus: int
    to_bus: int
    susceptance: float  # per-unit
    limit: float        # MW


@dataclass(frozen=True)
class PowerGridCase:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    slack_bus: int

    def bus_by_id(self) -> dict[int, Bus]:
        return {b.id: b for b in self.buses}


@dataclass(frozen=True)
class CouplingMap:
    """How road-side charging demand lands on the grid.

    node_to_bus must cover every road node. charge_propensity is the
    fraction of EV flow through a node that turns into charging demand in
    that slice; energy_per_vehicle is kWh drawn per charging vehicle.
    """

    node_to_bus: dict[int, int]
    charge_propensity: float
    energy_per_vehicle: float


# ---------------------------------------------------------------------------
# Per-slice solver output
# ---------------------------------------------------------------------------

UNSERVED = "unserved"


@dataclass(frozen=True)
class SliceState:
    """Everything the coupled model knows about one time slice."""

    slice: str
    link_volume: dict[int, float]          # vehicles per link
    node_demand: dict[int, float]          # kWh per road node
    node_assignment: dict[int, str]        # demand node -> station id or UNSERVED
    station_assigned: dict[str, float]     # kWh routed to the station
    station_served: dict[str, float]       # kWh actually served after shedding
    bus_load: dict[int, float]             # MW
    bus_voltage: dict[int, float]          # per-unit
    bus_price: dict[int, float]            # $/MWh
    station_voltage: dict[str, float]      # per-unit, bus behind the station
    station_price: dict[str, float]        # $/MWh at that same bus

    def total_demand(self) -> float:
        return sum(self.node_demand.values())

    def unserved_demand(self) -> float:
        return self.total_demand() - sum(self.station_assigned.values())


@dataclass(frozen=True)
class TimeSlicedState:
    slices: tuple[SliceState, ...]

    def labels(self) -> list[str]:
        return [s.slice for s in self.slices]

    def by_label(self) -> dict[str, SliceState]:
        return {s.slice: s for s in self.slices}


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    code: str
    entity: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]


def validate_scenario(
    road: RoadNetwork,
    od: ODMatrix,
    stations: list[ChargingStation] | tuple[ChargingStation, ...],
    grid: PowerGridCase,
    coupling: CouplingMap,
) -> ValidationReport:
    """Check every structural invariant of a parsed scenario.

    Pure and idempotent: violations come back as report entries, never as
    exceptions. An empty report means the scenario is safe to feed to the
    assignment and power-flow solvers.
    """
    out: list[Violation] = []

    def bad(code: str, entity: object, message: str) -> None:
        out.append(Violation(code, str(entity), message))

    # --- road network ---
    node_ids: set[int] = set()
    for node in road.nodes:
        if node.id in node_ids:
            bad("duplicate-id", node.id, f"road node id {node.id} appears twice")
        node_ids.add(node.id)
    link_ids: set[int] = set()
    for link in road.links:
        if link.id in link_ids:
            bad("duplicate-id", link.id, f"road link id {link.id} appears twice")
        link_ids.add(link.id)
        for end in (link.from_node, link.to_node):
            if end not in node_ids:
                bad("unknown-node", link.id,
                    f"link {link.id} references missing node {end}")
        if link.free_flow_time <= 0:
            bad("nonpositive-time", link.id,
                f"link {link.id} free_flow_time must be > 0")
        if link.capacity <= 0:
            bad("nonpositive-capacity", link.id,
                f"link {link.id} capacity must be > 0")
        if link.length < 0:
            bad("negative-length", link.id, f"link {link.id} length must be >= 0")

    # --- demand ---
    if not 0.0 <= od.ev_share <= 1.0:
        bad("ev-share-range", "od", f"ev_share {od.ev_share} outside [0, 1]")
    seen_od: set[tuple[int, int, str]] = set()
    for entry in od.entries:
        key = (entry.origin, entry.destination, entry.slice)
        if key in seen_od:
            bad("duplicate-entry", key, f"OD entry {key} appears twice")
        seen_od.add(key)
        if entry.trips < 0:
            bad("negative-trips", key, f"OD entry {key} has negative trips")
        if entry.origin == entry.destination:
            bad("self-loop-od", key, f"OD entry {key} has origin == destination")
        for end in (entry.origin, entry.destination):
            if end not in node_ids:
                bad("unknown-node", key, f"OD entry {key} references missing node {end}")
        if entry.slice not in od.slices:
            bad("unknown-slice-label", key, f"OD entry {key} uses unlisted slice")

    # --- stations ---
    seen_station_nodes: set[int] = set()
    seen_station_ids: set[str] = set()
    for st in stations:
        if st.id in seen_station_ids:
            bad("duplicate-id", st.id, f"station id {st.id} appears twice")
        seen_station_ids.add(st.id)
        if st.node not in node_ids:
            bad("unknown-node", st.id, f"station {st.id} sits on missing node {st.node}")
        elif st.node in seen_station_nodes:
            bad("node-collision", st.id, f"two stations on road node {st.node}")
        seen_station_nodes.add(st.node)
        if st.chargers < 1:
            bad("nonpositive-chargers", st.id, f"station {st.id} needs >= 1 charger")

    # --- grid ---
    bus_ids: set[int] = set()
    slack_count = 0
    for bus in grid.buses:
        if bus.id in bus_ids:
            bad("duplicate-id", bus.id, f"bus id {bus.id} appears twice")
        bus_ids.add(bus.id)
        if bus.id == grid.slack_bus:
            slack_count += 1
        if not bus.v_min < bus.v_max:
            bad("bounds-order", bus.id, f"bus {bus.id} requires v_min < v_max")
        if bus.is_generator and not 0.0 <= bus.gen_min <= bus.gen_max:
            bad("bounds-order", bus.id,
                f"bus {bus.id} generation bounds must satisfy 0 <= min <= max")
    if slack_count != 1:
        bad("missing-slack", grid.slack_bus,
            f"slack bus {grid.slack_bus} matched {slack_count} buses, need exactly 1")
    for idx, line in enumerate(grid.lines):
        for end in (line.from_bus, line.to_bus):
            if end not in bus_ids:
                bad("unknown-bus", idx, f"line {idx} references missing bus {end}")

    # --- coupling ---
    for nid in sorted(node_ids):
        if nid not in coupling.node_to_bus:
            bad("uncovered-node", nid, f"coupling map misses road node {nid}")
    for nid, bid in sorted(coupling.node_to_bus.items()):
        if nid not in node_ids:
            bad("unknown-node", nid, f"coupling map references missing road node {nid}")
        if bid not in bus_ids:
            bad("unknown-bus", nid, f"coupling map sends node {nid} to missing bus {bid}")
    if not 0.0 <= coupling.charge_propensity <= 1.0:
        bad("propensity-range", "coupling",
            f"charge_propensity {coupling.charge_propensity} outside [0, 1]")
    if coupling.energy_per_vehicle <= 0:
        bad("nonpositive-energy", "coupling", "energy_per_vehicle must be > 0")

    return ValidationReport(tuple(out))

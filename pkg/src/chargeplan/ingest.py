"""Parsers and writers for the scenario file formats.

Formats are line-oriented text, `#` starts a comment. The road network
follows the TNTP convention so public assignment benchmarks load as-is
(`~` comments accepted there too); OD and station files are plain CSV with
a header; the grid case is a bus/branch table. Every parser raises
ParseError with a machine-readable code and a line number, never anything
else, whatever the input bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

from .model import (
    Bus,
    ChargingStation,
    CouplingMap,
    Line,
    ODEntry,
    ODMatrix,
    PowerGridCase,
    RoadLink,
    RoadNetwork,
    RoadNode,
)

FORMAT_VERSION = "1"

_HOUR_LABEL = re.compile(r"^h([01][0-9]|2[0-3])$")
_DATED_LABEL = re.compile(r"^\d{4}-\d{2}-\d{2}:h([01][0-9]|2[0-3])$")


class ParseError(ValueError):
    """Structured parse failure: code is machine-readable, line is 1-based."""

    def __init__(self, code: str, message: str, line: int | None = None):
        self.code = code
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{code}: {message}{where}")


def _as_text(data: str | bytes) -> str:
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("invalid-utf8", str(exc)) from exc
    return data


def _data_lines(text: str, comment_chars: str = "#") -> list[tuple[int, str]]:
    """Non-empty, non-comment lines with their 1-based line numbers."""
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in comment_chars:
            continue
        out.append((no, line))
    return out


def _float(token: str, what: str, line: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError("bad-number", f"{what} is not a number: {token!r}", line)
    if math.isnan(value) or math.isinf(value):
        raise ParseError("bad-number", f"{what} must be finite: {token!r}", line)
    return value


def _int(token: str, what: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError("bad-number", f"{what} is not an integer: {token!r}", line)


def valid_slice_label(label: str) -> bool:
    return bool(_HOUR_LABEL.match(label) or _DATED_LABEL.match(label))


# ---------------------------------------------------------------------------
# Road network (TNTP)
# ---------------------------------------------------------------------------

def parse_road_network(text: str | bytes, node_text: str | bytes | None = None) -> RoadNetwork:
    """Parse a TNTP net file, plus an optional TNTP node file for coordinates.

    Node ids are 1..N as declared by <NUMBER OF NODES>; links get 1-based
    ids in file order. Without a node file all coordinates are (0, 0), which
    is enough for assignment but not for station snapping.
    """
    text = _as_text(text)
    n_nodes: int | None = None
    declared_links: int | None = None
    links: list[RoadLink] = []
    in_body = False

    for no, line in _data_lines(text, comment_chars="#~"):
        meta = re.match(r"^<([^>]+)>\s*(.*)$", line)
        if meta:
            tag = meta.group(1).strip().upper()
            value = meta.group(2).strip()
            if tag == "NUMBER OF NODES":
                n_nodes = _int(value, "node count", no)
            elif tag == "NUMBER OF LINKS":
                declared_links = _int(value, "link count", no)
            elif tag == "END OF METADATA":
                in_body = True
            continue
        if not in_body and n_nodes is None:
            raise ParseError("syntax", f"unexpected row before metadata: {line!r}", no)
        fields = line.rstrip(";").split()
        if len(fields) < 5:
            raise ParseError(
                "syntax",
                "link row needs at least init, term, capacity, length, fftime",
                no,
            )
        from_node = _int(fields[0], "init node", no)
        to_node = _int(fields[1], "term node", no)
        capacity = _float(fields[2], "capacity", no)
        length = _float(fields[3], "length", no)
        fftime = _float(fields[4], "free flow time", no)
        if fftime <= 0:
            raise ParseError("nonpositive-time", f"free flow time {fftime} on row", no)
        if capacity <= 0:
            raise ParseError("nonpositive-capacity", f"capacity {capacity} on row", no)
        if length < 0:
            raise ParseError("negative-length", f"length {length} on row", no)
        links.append(
            RoadLink(
                id=len(links) + 1,
                from_node=from_node,
                to_node=to_node,
                free_flow_time=fftime,
                capacity=capacity,
                length=length,
            )
        )

    if n_nodes is None:
        raise ParseError("syntax", "missing <NUMBER OF NODES> metadata")
    if declared_links is not None and declared_links != len(links):
        raise ParseError(
            "syntax",
            f"<NUMBER OF LINKS> says {declared_links} but file has {len(links)}",
        )

    coords = _parse_node_coords(node_text) if node_text is not None else {}
    for nid in coords:
        if not 1 <= nid <= n_nodes:
            raise ParseError("unknown-node", f"node file mentions node {nid}")
    if len(coords) != len(set(coords)):  # dict keys already unique; kept for clarity
        raise ParseError("duplicate-id", "duplicate node id in node file")

    nodes = tuple(
        RoadNode(id=i, lat=coords.get(i, (0.0, 0.0))[0], lon=coords.get(i, (0.0, 0.0))[1])
        for i in range(1, n_nodes + 1)
    )
    node_ids = {n.id for n in nodes}
    for link in links:
        for end in (link.from_node, link.to_node):
            if end not in node_ids:
                raise ParseError(
                    "dangling-endpoint",
                    f"link {link.id} references node {end} outside 1..{n_nodes}",
                )
    return RoadNetwork(nodes=nodes, links=tuple(links))


def _parse_node_coords(node_text: str | bytes) -> dict[int, tuple[float, float]]:
    node_text = _as_text(node_text)
    coords: dict[int, tuple[float, float]] = {}
    for no, line in _data_lines(node_text, comment_chars="#~"):
        low = line.lower()
        if low.startswith("node") or low.startswith("<"):
            continue  # header row or stray metadata
        fields = line.rstrip(";").split()
        if len(fields) < 3:
            raise ParseError("syntax", "node row needs id, x, y", no)
        nid = _int(fields[0], "node id", no)
        x = _float(fields[1], "x", no)
        y = _float(fields[2], "y", no)
        if nid in coords:
            raise ParseError("duplicate-id", f"node id {nid} appears twice", no)
        # TNTP node files are x (lon-like), y (lat-like)
        coords[nid] = (y, x)
    return coords


def write_road_network(road: RoadNetwork) -> tuple[str, str]:
    """Serialize to (net_text, node_text); parse_road_network round-trips."""
    net = io.StringIO()
    net.write(f"<NUMBER OF NODES> {len(road.nodes)}\n")
    net.write(f"<NUMBER OF LINKS> {len(road.links)}\n")
    net.write("<END OF METADATA>\n")
    net.write("~ init term capacity length fftime ;\n")
    for link in road.links:
        net.write(
            f"{link.from_node} {link.to_node} {link.capacity!r} "
            f"{link.length!r} {link.free_flow_time!r} ;\n"
        )
    node = io.StringIO()
    node.write("node x y ;\n")
    for n in road.nodes:
        node.write(f"{n.id} {n.lon!r} {n.lat!r} ;\n")
    return net.getvalue(), node.getvalue()


# ---------------------------------------------------------------------------
# OD matrix (CSV)
# ---------------------------------------------------------------------------

def parse_od(text: str | bytes, ev_share: float) -> ODMatrix:
    """Parse origin,destination,slice,trips[,date] CSV. Zero-trip rows drop."""
    text = _as_text(text)
    if not 0.0 <= ev_share <= 1.0:
        raise ParseError("ev-share-range", f"ev_share {ev_share} outside [0, 1]")
    rows = _csv_rows(text, required={"origin", "destination", "slice", "trips"})
    entries: list[ODEntry] = []
    seen: set[tuple[int, int, str]] = set()
    labels: set[str] = set()
    for no, row in rows:
        origin = _int(row["origin"], "origin", no)
        destination = _int(row["destination"], "destination", no)
        label = row["slice"].strip()
        if row.get("date"):
            label = f"{row['date'].strip()}:{label}"
        if not valid_slice_label(label):
            raise ParseError("unknown-slice-label", f"bad slice label {label!r}", no)
        trips = _float(row["trips"], "trips", no)
        if trips < 0:
            raise ParseError("negative-trips", f"trips {trips} below zero", no)
        if trips == 0:
            continue
        if origin == destination:
            raise ParseError("self-loop-od", f"origin == destination == {origin}", no)
        key = (origin, destination, label)
        if key in seen:
            raise ParseError("duplicate-entry", f"OD entry {key} appears twice", no)
        seen.add(key)
        labels.add(label)
        entries.append(ODEntry(origin, destination, label, trips))
    return ODMatrix(slices=tuple(sorted(labels)), entries=tuple(entries), ev_share=ev_share)


def write_od(od: ODMatrix) -> str:
    out = io.StringIO()
    out.write("origin,destination,slice,trips\n")
    for e in od.entries:
        out.write(f"{e.origin},{e.destination},{e.slice},{e.trips!r}\n")
    return out.getvalue()


def _csv_rows(text: str, required: set[str]) -> list[tuple[int, dict[str, str]]]:
    lines = [
        (no, line)
        for no, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines:
        raise ParseError("empty-file", "no data rows")
    header_no, header_line = lines[0]
    try:
        header = next(csv.reader([header_line]))
    except csv.Error as exc:
        raise ParseError("syntax", str(exc), header_no) from exc
    header = [h.strip().lower() for h in header]
    missing = required - set(header)
    if missing:
        raise ParseError(
            "syntax", f"header misses columns: {', '.join(sorted(missing))}", header_no
        )
    out = []
    for no, line in lines[1:]:
        try:
            fields = next(csv.reader([line]))
        except csv.Error as exc:
            raise ParseError("syntax", str(exc), no) from exc
        if len(fields) != len(header):
            raise ParseError(
                "syntax", f"row has {len(fields)} fields, header has {len(header)}", no
            )
        out.append((no, dict(zip(header, (f.strip() for f in fields)))))
    return out


# ---------------------------------------------------------------------------
# Charging stations (CSV) with nearest-intersection snapping
# ---------------------------------------------------------------------------

def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in km."""
    r = 6371.0088
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = math.radians(lat2 - lat1)
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2.0) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2.0) ** 2
    return 2.0 * r * math.asin(min(1.0, math.sqrt(a)))


def nearest_node(road: RoadNetwork, lat: float, lon: float) -> int:
    """Closest road node by great-circle distance; ties go to the lowest id."""
    best = min(road.nodes, key=lambda n: (haversine_km(lat, lon, n.lat, n.lon), n.id))
    return best.id


@dataclass(frozen=True)
class StationWarning:
    code: str
    message: str


def parse_stations(
    text: str | bytes, road: RoadNetwork
) -> tuple[list[ChargingStation], list[StationWarning]]:
    """Parse id,name,lat,lon,chargers[,existing] CSV and pin rows to nodes.

    Two stations snapping to the same node merge into one, chargers summed,
    keeping the first row's id/name; each merge emits a warning record.
    """
    text = _as_text(text)
    rows = _csv_rows(text, required={"id", "name", "lat", "lon", "chargers"})
    by_node: dict[int, ChargingStation] = {}
    order: list[int] = []
    warnings: list[StationWarning] = []
    seen_ids: set[str] = set()
    for no, row in rows:
        sid = row["id"]
        if not sid or any(ch.isspace() for ch in sid):
            # ids flow into line-oriented snapshot files, so no whitespace
            raise ParseError("bad-id", f"station id {sid!r} is empty or has whitespace", no)
        if sid in seen_ids:
            raise ParseError("duplicate-id", f"station id {sid!r} appears twice", no)
        seen_ids.add(sid)
        lat = _float(row["lat"], "lat", no)
        lon = _float(row["lon"], "lon", no)
        chargers = _int(row["chargers"], "chargers", no)
        if chargers < 1:
            raise ParseError("nonpositive-chargers", f"chargers {chargers} < 1", no)
        existing = row.get("existing", "1").strip() not in ("0", "false", "no")
        node = nearest_node(road, lat, lon)
        if node in by_node:
            prev = by_node[node]
            by_node[node] = ChargingStation(
                id=prev.id,
                name=prev.name,
                node=node,
                chargers=prev.chargers + chargers,
                is_existing=prev.is_existing or existing,
            )
            warnings.append(
                StationWarning(
                    "node-collision",
                    f"station {sid!r} merged into {prev.id!r} at node {node}",
                )
            )
        else:
            by_node[node] = ChargingStation(
                id=sid, name=row["name"], node=node, chargers=chargers, is_existing=existing
            )
            order.append(node)
    return [by_node[n] for n in order], warnings


def write_stations(stations: list[ChargingStation], road: RoadNetwork) -> str:
    nodes = road.node_by_id()
    out = io.StringIO()
    out.write("id,name,lat,lon,chargers,existing\n")
    for st in stations:
        n = nodes[st.node]
        out.write(
            f"{st.id},{st.name},{n.lat!r},{n.lon!r},{st.chargers},{int(st.is_existing)}\n"
        )
    return out.getvalue()


def mark_stations(road: RoadNetwork, stations: list[ChargingStation]) -> RoadNetwork:
    """Copy of the network with has_station set on the stations' nodes."""
    hosts = {st.node for st in stations}
    return RoadNetwork(
        nodes=tuple(
            RoadNode(n.id, n.lat, n.lon, has_station=n.id in hosts) for n in road.nodes
        ),
        links=road.links,
    )


# ---------------------------------------------------------------------------
# Grid case (bus/branch tables)
# ---------------------------------------------------------------------------

def parse_grid_case(text: str | bytes) -> PowerGridCase:
    """Parse BUS/BRANCH/SLACK sections into a PowerGridCase.

    BUS rows: id base_load v_min v_max is_gen gen_min gen_max gen_cost
    BRANCH rows: from to susceptance limit_mw
    """
    text = _as_text(text)
    buses: list[Bus] = []
    lines: list[Line] = []
    slack: int | None = None
    section: str | None = None
    bus_ids: set[int] = set()

    for no, line in _data_lines(text):
        upper = line.upper()
        if upper == "BUS":
            section = "bus"
            continue
        if upper == "BRANCH":
            section = "branch"
            continue
        if upper == "END":
            section = None
            continue
        if upper.startswith("SLACK"):
            if slack is not None:
                raise ParseError("multiple-slack", "second SLACK declaration", no)
            fields = line.split()
            if len(fields) != 2:
                raise ParseError("syntax", "SLACK needs exactly one bus id", no)
            slack = _int(fields[1], "slack bus", no)
            continue
        if section == "bus":
            f = line.split()
            if len(f) != 8:
                raise ParseError("syntax", "bus row needs 8 columns", no)
            bid = _int(f[0], "bus id", no)
            if bid in bus_ids:
                raise ParseError("duplicate-id", f"bus id {bid} appears twice", no)
            bus_ids.add(bid)
            v_min = _float(f[2], "v_min", no)
            v_max = _float(f[3], "v_max", no)
            if not v_min < v_max:
                raise ParseError("bounds-order", f"bus {bid} needs v_min < v_max", no)
            gen_min = _float(f[5], "gen_min", no)
            gen_max = _float(f[6], "gen_max", no)
            if not 0.0 <= gen_min <= gen_max:
                raise ParseError(
                    "bounds-order", f"bus {bid} needs 0 <= gen_min <= gen_max", no
                )
            buses.append(
                Bus(
                    id=bid,
                    base_load=_float(f[1], "base_load", no),
                    v_min=v_min,
                    v_max=v_max,
                    is_generator=bool(_int(f[4], "is_gen", no)),
                    gen_min=gen_min,
                    gen_max=gen_max,
                    gen_cost=_float(f[7], "gen_cost", no),
                )
            )
        elif section == "branch":
            f = line.split()
            if len(f) != 4:
                raise ParseError("syntax", "branch row needs 4 columns", no)
            from_bus = _int(f[0], "from bus", no)
            to_bus = _int(f[1], "to bus", no)
            if from_bus not in bus_ids or to_bus not in bus_ids:
                raise ParseError(
                    "dangling-endpoint", f"branch {from_bus}-{to_bus} misses a bus", no
                )
            susceptance = _float(f[2], "susceptance", no)
            if susceptance <= 0:
                raise ParseError("nonpositive-susceptance", "susceptance must be > 0", no)
            lines.append(
                Line(
                    from_bus=from_bus,
                    to_bus=to_bus,
                    susceptance=susceptance,
                    limit=_float(f[3], "limit", no),
                )
            )
        else:
            raise ParseError("syntax", f"row outside any section: {line!r}", no)

    if not buses:
        raise ParseError("empty-file", "no bus rows")
    if slack is None:
        raise ParseError("missing-slack", "no SLACK declaration")
    if slack not in bus_ids:
        raise ParseError("missing-slack", f"slack bus {slack} is not a declared bus")
    return PowerGridCase(buses=tuple(buses), lines=tuple(lines), slack_bus=slack)


def write_grid_case(grid: PowerGridCase) -> str:
    out = io.StringIO()
    out.write("BUS\n# id base_load v_min v_max is_gen gen_min gen_max gen_cost\n")
    for b in grid.buses:
        out.write(
            f"{b.id} {b.base_load!r} {b.v_min!r} {b.v_max!r} "
            f"{int(b.is_generator)} {b.gen_min!r} {b.gen_max!r} {b.gen_cost!r}\n"
        )
    out.write("END\nBRANCH\n# from to susceptance limit_mw\n")
    for l in grid.lines:
        out.write(f"{l.from_bus} {l.to_bus} {l.susceptance!r} {l.limit!r}\n")
    out.write(f"END\nSLACK {grid.slack_bus}\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# Coupling map (CSV)
# ---------------------------------------------------------------------------

def parse_coupling(
    text: str | bytes, charge_propensity: float, energy_per_vehicle: float
) -> CouplingMap:
    text = _as_text(text)
    rows = _csv_rows(text, required={"node", "bus"})
    mapping: dict[int, int] = {}
    for no, row in rows:
        nid = _int(row["node"], "node", no)
        if nid in mapping:
            raise ParseError("duplicate-entry", f"node {nid} mapped twice", no)
        mapping[nid] = _int(row["bus"], "bus", no)
    return CouplingMap(
        node_to_bus=mapping,
        charge_propensity=charge_propensity,
        energy_per_vehicle=energy_per_vehicle,
    )


def write_coupling(coupling: CouplingMap) -> str:
    out = io.StringIO()
    out.write("node,bus\n")
    for nid in sorted(coupling.node_to_bus):
        out.write(f"{nid},{coupling.node_to_bus[nid]}\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# Scenario bundle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioBundle:
    """File layout of one scenario directory, from scenario.json."""

    format_version: str
    road_net: str
    road_nodes: str | None
    od: str
    stations: str
    grid: str
    coupling: str
    ev_share: float
    charge_propensity: float
    energy_per_vehicle: float


@dataclass(frozen=True)
class Scenario:
    road: RoadNetwork
    od: ODMatrix
    stations: tuple[ChargingStation, ...]
    grid: PowerGridCase
    coupling: CouplingMap
    warnings: tuple[StationWarning, ...] = ()


def read_bundle(scenario_dir: str | Path) -> ScenarioBundle:
    path = Path(scenario_dir) / "scenario.json"
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError("syntax", f"scenario.json: {exc}") from exc
    version = str(raw.get("format_version", ""))
    if version != FORMAT_VERSION:
        raise ParseError(
            "unsupported-version",
            f"format_version {version!r}, supported: {FORMAT_VERSION!r}",
        )
    try:
        return ScenarioBundle(
            format_version=version,
            road_net=raw["road_net"],
            road_nodes=raw.get("road_nodes"),
            od=raw["od"],
            stations=raw["stations"],
            grid=raw["grid"],
            coupling=raw["coupling"],
            ev_share=float(raw["ev_share"]),
            charge_propensity=float(raw["charge_propensity"]),
            energy_per_vehicle=float(raw["energy_per_vehicle"]),
        )
    except KeyError as exc:
        raise ParseError("syntax", f"scenario.json misses key {exc}") from exc


def write_scenario(scenario: Scenario, scenario_dir: str | Path) -> None:
    """Write a scenario directory load_scenario can read back."""
    base = Path(scenario_dir)
    base.mkdir(parents=True, exist_ok=True)
    net_text, node_text = write_road_network(scenario.road)
    (base / "road_net.tntp").write_text(net_text, encoding="utf-8")
    (base / "road_node.tntp").write_text(node_text, encoding="utf-8")
    (base / "od.csv").write_text(write_od(scenario.od), encoding="utf-8")
    (base / "stations.csv").write_text(
        write_stations(list(scenario.stations), scenario.road), encoding="utf-8"
    )
    (base / "grid.case").write_text(write_grid_case(scenario.grid), encoding="utf-8")
    (base / "coupling.csv").write_text(write_coupling(scenario.coupling), encoding="utf-8")
    manifest = {
        "format_version": FORMAT_VERSION,
        "road_net": "road_net.tntp",
        "road_nodes": "road_node.tntp",
        "od": "od.csv",
        "stations": "stations.csv",
        "grid": "grid.case",
        "coupling": "coupling.csv",
        "ev_share": scenario.od.ev_share,
        "charge_propensity": scenario.coupling.charge_propensity,
        "energy_per_vehicle": scenario.coupling.energy_per_vehicle,
    }
    (base / "scenario.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_scenario(scenario_dir: str | Path) -> Scenario:
    """Read a scenario directory into validated-parse domain objects."""
    base = Path(scenario_dir)
    bundle = read_bundle(base)
    node_text = (
        (base / bundle.road_nodes).read_text(encoding="utf-8")
        if bundle.road_nodes
        else None
    )
    road = parse_road_network((base / bundle.road_net).read_text(encoding="utf-8"), node_text)
    od = parse_od((base / bundle.od).read_text(encoding="utf-8"), bundle.ev_share)
    stations, warnings = parse_stations(
        (base / bundle.stations).read_text(encoding="utf-8"), road
    )
    grid = parse_grid_case((base / bundle.grid).read_text(encoding="utf-8"))
    coupling = parse_coupling(
        (base / bundle.coupling).read_text(encoding="utf-8"),
        bundle.charge_propensity,
        bundle.energy_per_vehicle,
    )
    return Scenario(
        road=mark_stations(road, stations),
        od=od,
        stations=tuple(stations),
        grid=grid,
        coupling=coupling,
        warnings=tuple(warnings),
    )

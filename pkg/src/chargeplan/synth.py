"""Deterministic scenario generators for fixtures, demos and tests.

Everything here is seeded: the same call always produces the same
scenario, byte for byte once written out.
"""

from __future__ import annotations

import math

import numpy as np

from .ingest import Scenario
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

# Standard IEEE 14-bus data: loads (MW), generator caps (MW), branch
# reactances (pu, converted to susceptance below). Linear $/MWh costs
# stand in for the quadratic ones; thermal limits are left open.
_IEEE14_LOADS = {
    1: 0.0, 2: 21.7, 3: 94.2, 4: 47.8, 5: 7.6, 6: 11.2, 7: 0.0,
    8: 0.0, 9: 29.5, 10: 9.0, 11: 3.5, 12: 6.1, 13: 13.5, 14: 14.9,
}
_IEEE14_GENS = {1: (332.4, 20.0), 2: (140.0, 20.0), 3: (100.0, 40.0),
                6: (100.0, 40.0), 8: (100.0, 40.0)}
_IEEE14_BRANCHES = [
    (1, 2, 0.05917), (1, 5, 0.22304), (2, 3, 0.19797), (2, 4, 0.17632),
    (2, 5, 0.17388), (3, 4, 0.17103), (4, 5, 0.04211), (4, 7, 0.20912),
    (4, 9, 0.55618), (5, 6, 0.25202), (6, 11, 0.19890), (6, 12, 0.25581),
    (6, 13, 0.13027), (7, 8, 0.17615), (7, 9, 0.11001), (9, 10, 0.08450),
    (9, 14, 0.27038), (10, 11, 0.19207), (12, 13, 0.19988), (13, 14, 0.34802),
]


def ieee14_case(line_limit: float = 0.0) -> PowerGridCase:
    """The 14-bus test system with linear costs; limit <= 0 means open lines."""
    buses = tuple(
        Bus(
            id=i,
            base_load=_IEEE14_LOADS[i],
            v_min=0.94,
            v_max=1.06,
            is_generator=i in _IEEE14_GENS,
            gen_min=0.0,
            gen_max=_IEEE14_GENS.get(i, (0.0, 0.0))[0],
            gen_cost=_IEEE14_GENS.get(i, (0.0, 0.0))[1],
        )
        for i in range(1, 15)
    )
    lines = tuple(
        Line(from_bus=f, to_bus=t, susceptance=1.0 / x, limit=line_limit)
        for f, t, x in _IEEE14_BRANCHES
    )
    return PowerGridCase(buses=buses, lines=lines, slack_bus=1)


# The classic 24-intersection benchmark topology: 38 two-way streets.
_BENCH24_PAIRS = [
    (1, 2), (1, 3), (2, 6), (3, 4), (3, 12), (4, 5), (4, 11), (5, 6),
    (5, 9), (6, 8), (7, 8), (7, 18), (8, 9), (8, 16), (9, 10), (10, 11),
    (10, 15), (10, 16), (10, 17), (11, 12), (11, 14), (12, 13), (13, 24),
    (14, 15), (14, 23), (15, 19), (15, 22), (16, 17), (16, 18), (17, 19),
    (18, 20), (19, 20), (20, 21), (20, 22), (21, 22), (21, 24), (22, 23),
    (23, 24),
]

# Directional capacities sized so every road runs near (but mostly under)
# capacity at equilibrium; this keeps the volume-delay curve responsive on
# every link, which is what makes the benchmark discriminating.
_BENCH24_CAPACITY = {
    (1, 2): 1200, (1, 3): 2300, (2, 1): 1000, (2, 6): 2500,
    (3, 1): 2200, (3, 4): 4000, (3, 12): 1600, (4, 3): 3900,
    (4, 5): 2900, (4, 11): 4900, (5, 4): 3300, (5, 6): 4100,
    (5, 9): 1900, (6, 2): 2500, (6, 5): 3400, (6, 8): 3100,
    (7, 8): 800, (7, 18): 1800, (8, 6): 2900, (8, 7): 800,
    (8, 9): 1300, (8, 16): 2800, (9, 5): 3100, (9, 8): 1300,
    (9, 10): 3800, (10, 9): 4500, (10, 11): 4100, (10, 15): 3500,
    (10, 16): 2400, (10, 17): 2700, (11, 4): 4800, (11, 10): 4500,
    (11, 12): 2200, (11, 14): 4300, (12, 3): 1500, (12, 11): 2200,
    (12, 13): 1700, (13, 12): 1700, (13, 24): 1700, (14, 11): 4200,
    (14, 15): 3500, (14, 23): 2400, (15, 10): 3700, (15, 14): 3600,
    (15, 19): 1000, (15, 22): 3900, (16, 8): 2800, (16, 10): 2000,
    (16, 17): 1200, (16, 18): 3300, (17, 10): 2700, (17, 16): 1300,
    (17, 19): 3000, (18, 7): 1600, (18, 16): 3400, (18, 20): 2400,
    (19, 15): 900, (19, 17): 3000, (19, 20): 2100, (20, 18): 2600,
    (20, 19): 2100, (20, 21): 1800, (20, 22): 800, (21, 20): 2200,
    (21, 22): 2200, (21, 24): 2400, (22, 15): 4200, (22, 20): 800,
    (22, 21): 2300, (22, 23): 400, (23, 14): 2700, (23, 22): 500,
    (23, 24): 1000, (24, 13): 1600, (24, 21): 2500, (24, 23): 800,
}
_BENCH24_XY = {
    1: (0.0, 6.0), 2: (3.0, 6.0), 3: (0.0, 5.0), 4: (1.0, 4.5), 5: (2.0, 4.5),
    6: (3.0, 5.0), 7: (4.5, 3.5), 8: (3.5, 3.5), 9: (2.0, 3.5), 10: (2.0, 2.8),
    11: (1.0, 2.8), 12: (0.0, 2.8), 13: (0.0, 0.0), 14: (1.0, 1.8),
    15: (2.0, 1.8), 16: (3.5, 2.8), 17: (3.0, 2.2), 18: (4.5, 2.8),
    19: (3.0, 1.8), 20: (3.0, 0.8), 21: (2.0, 0.8), 22: (2.0, 1.2),
    23: (1.0, 0.8), 24: (1.0, 0.0),
}


def benchmark24(seed: int = 4) -> Scenario:
    """24-node, 76-link assignment benchmark with one morning slice."""
    rng = np.random.Generator(np.random.PCG64(seed))
    nodes = tuple(
        RoadNode(id=i, lat=30.0 + _BENCH24_XY[i][1] * 0.01, lon=110.0 + _BENCH24_XY[i][0] * 0.01)
        for i in range(1, 25)
    )
    links: list[RoadLink] = []
    for a, b in _BENCH24_PAIRS:
        ax, ay = _BENCH24_XY[a]
        bx, by = _BENCH24_XY[b]
        length = math.hypot(ax - bx, ay - by)
        fftime = round(2.0 + 2.0 * length + float(rng.uniform(0.0, 2.0)), 2)
        for f, t in ((a, b), (b, a)):
            links.append(
                RoadLink(
                    id=len(links) + 1,
                    from_node=f,
                    to_node=t,
                    free_flow_time=fftime,
                    capacity=float(_BENCH24_CAPACITY[(f, t)]),
                    length=round(length, 3),
                )
            )
    road = RoadNetwork(nodes=nodes, links=tuple(links))

    entries: list[ODEntry] = []
    for o in range(1, 25):
        for d in range(1, 25):
            if o == d:
                continue
            entries.append(ODEntry(o, d, "h08", float(rng.integers(20, 170))))
    od = ODMatrix(slices=("h08",), entries=tuple(entries), ev_share=0.3)

    stations = (
        ChargingStation("S1", "north yard", 6, 12),
        ChargingStation("S2", "river lot", 10, 8),
        ChargingStation("S3", "south depot", 20, 16),
        ChargingStation("S4", "west garage", 12, 6),
    )
    coupling = CouplingMap(
        node_to_bus={i: (i - 1) % 14 + 1 for i in range(1, 25)},
        charge_propensity=0.02,
        energy_per_vehicle=10.0,
    )
    return Scenario(
        road=road, od=od, stations=stations, grid=ieee14_case(), coupling=coupling
    )


def toy_scenario() -> Scenario:
    """3x3 street grid, two slices, two stations, 14-bus grid behind it."""
    spacing = 0.009  # about 1 km
    nodes = []
    for r in range(3):
        for c in range(3):
            nodes.append(
                RoadNode(id=r * 3 + c + 1, lat=31.2 + r * spacing, lon=121.4 + c * spacing)
            )
    links: list[RoadLink] = []

    def connect(a: int, b: int, fftime: float, cap: float):
        km = 1.0
        for f, t in ((a, b), (b, a)):
            links.append(RoadLink(len(links) + 1, f, t, fftime, cap, km))

    for r in range(3):
        for c in range(2):
            connect(r * 3 + c + 1, r * 3 + c + 2, 4.0, 900.0)
    for r in range(2):
        for c in range(3):
            connect(r * 3 + c + 1, (r + 1) * 3 + c + 1, 5.0, 700.0)

    road = RoadNetwork(nodes=tuple(nodes), links=tuple(links))
    entries = []
    for o, d, morning, evening in [
        (1, 9, 400.0, 150.0),
        (3, 7, 350.0, 120.0),
        (7, 3, 100.0, 320.0),
        (9, 1, 120.0, 360.0),
        (2, 8, 200.0, 200.0),
        (4, 6, 150.0, 180.0),
    ]:
        entries.append(ODEntry(o, d, "h08", morning))
        entries.append(ODEntry(o, d, "h18", evening))
    od = ODMatrix(slices=("h08", "h18"), entries=tuple(entries), ev_share=0.3)
    stations = (
        ChargingStation("S1", "center plaza", 5, 10),
        ChargingStation("S2", "east gate", 6, 6),
    )
    coupling = CouplingMap(
        node_to_bus={n.id: ((n.id - 1) % 14) + 1 for n in nodes},
        charge_propensity=0.05,
        energy_per_vehicle=12.0,
    )
    return Scenario(
        road=road, od=od, stations=stations, grid=ieee14_case(), coupling=coupling
    )


def synthetic_city(
    side: int = 10,
    n_slices: int = 24,
    seed: int = 7,
    n_stations: int = 6,
    od_pairs_per_slice: int = 40,
) -> Scenario:
    """Jittered street grid (side*side nodes) with a two-peak daily profile."""
    rng = np.random.Generator(np.random.PCG64(seed))
    spacing = 0.008
    nodes = []
    for r in range(side):
        for c in range(side):
            jitter = rng.uniform(-0.15, 0.15, size=2) * spacing
            nodes.append(
                RoadNode(
                    id=r * side + c + 1,
                    lat=30.5 + r * spacing + float(jitter[0]),
                    lon=114.2 + c * spacing + float(jitter[1]),
                )
            )
    links: list[RoadLink] = []

    def connect(a: int, b: int):
        fftime = round(float(rng.uniform(2.0, 6.0)), 2)
        cap = float(rng.choice([500.0, 800.0, 1200.0, 2000.0]))
        km = round(float(rng.uniform(0.6, 1.4)), 3)
        for f, t in ((a, b), (b, a)):
            links.append(RoadLink(len(links) + 1, f, t, fftime, cap, km))

    for r in range(side):
        for c in range(side):
            nid = r * side + c + 1
            if c + 1 < side:
                connect(nid, nid + 1)
            if r + 1 < side:
                connect(nid, nid + side)
    road = RoadNetwork(nodes=tuple(nodes), links=tuple(links))

    hours = [f"h{h:02d}" for h in range(n_slices)]
    profile = [
        0.25
        + 0.9 * math.exp(-((h - 8.0) ** 2) / 6.0)
        + 0.8 * math.exp(-((h - 18.0) ** 2) / 8.0)
        for h in range(n_slices)
    ]
    n_nodes = side * side
    base_pairs = []
    for _ in range(od_pairs_per_slice):
        o = int(rng.integers(1, n_nodes + 1))
        d = int(rng.integers(1, n_nodes + 1))
        while d == o:
            d = int(rng.integers(1, n_nodes + 1))
        base_pairs.append((o, d, float(rng.integers(150, 900))))
    entries = []
    seen: set[tuple[int, int, str]] = set()
    for label, factor in zip(hours, profile):
        for o, d, base in base_pairs:
            if (o, d, label) in seen:
                continue
            seen.add((o, d, label))
            entries.append(ODEntry(o, d, label, round(base * factor, 1)))
    od = ODMatrix(slices=tuple(hours), entries=tuple(entries), ev_share=0.3)

    station_nodes = sorted(
        int(i) + 1 for i in rng.choice(n_nodes, size=n_stations, replace=False)
    )
    stations = tuple(
        ChargingStation(f"S{i+1}", f"station {i+1}", node, int(rng.integers(6, 21)))
        for i, node in enumerate(station_nodes)
    )
    coupling = CouplingMap(
        node_to_bus={n.id: ((n.id - 1) * 14 // n_nodes) + 1 for n in nodes},
        charge_propensity=0.02,
        energy_per_vehicle=10.0,
    )
    return Scenario(
        road=road, od=od, stations=stations, grid=ieee14_case(), coupling=coupling
    )

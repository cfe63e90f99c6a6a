"""User-equilibrium traffic assignment and node-level charging demand.

Solver: Frank-Wolfe. Each iteration computes an all-or-nothing assignment
on current travel times (Dijkstra per origin) and takes an exact bisection
step on the Beckmann objective. Convergence is measured by the relative
gap (TSTT - SPTT) / SPTT.

Determinism: shortest-path ties break on the lexicographically smallest
node sequence, then on lowest link id among parallel links; all reductions
run in fixed (file) order, so results are bit-stable.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .model import CouplingMap, ODEntry, RoadNetwork

PathKey = tuple[int, ...]  # link ids along a used path


class DisconnectedODError(ValueError):
    """Some OD pairs cannot be routed at all."""

    def __init__(self, pairs: list[tuple[int, int]]):
        self.pairs = pairs
        shown = ", ".join(f"{o}->{d}" for o, d in pairs[:10])
        more = "" if len(pairs) <= 10 else f" (+{len(pairs) - 10} more)"
        super().__init__(f"unreachable OD pairs: {shown}{more}")


@dataclass(frozen=True)
class LinkCostModel:
    """BPR volume-delay function t(v) = t0 * (1 + alpha * (v/c)^beta)."""

    alpha: float = 0.15
    beta: float = 4.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta < 1:
            raise ValueError(f"beta must be >= 1, got {self.beta}")


@dataclass(frozen=True)
class AssignmentResult:
    link_volume: dict[int, float]
    relative_gap: float
    iterations: int
    od_path_flows: dict[tuple[int, int], dict[PathKey, float]] | None
    gap_history: tuple[float, ...]
    objective_history: tuple[float, ...]


class _Graph:
    """Array view of a RoadNetwork for the solver hot path."""

    def __init__(self, road: RoadNetwork):
        self.road = road
        self.link_ids = [l.id for l in road.links]
        self.index = {lid: i for i, lid in enumerate(self.link_ids)}
        self.t0 = np.array([l.free_flow_time for l in road.links], dtype=float)
        self.cap = np.array([l.capacity for l in road.links], dtype=float)
        self.from_node = [l.from_node for l in road.links]
        self.to_node = [l.to_node for l in road.links]
        # adjacency: node -> list of (link index, head node)
        self.adj: dict[int, list[tuple[int, int]]] = {n.id: [] for n in road.nodes}
        for i, l in enumerate(road.links):
            self.adj[l.from_node].append((i, l.to_node))

    def times(self, volume: np.ndarray, cost: LinkCostModel) -> np.ndarray:
        return self.t0 * (1.0 + cost.alpha * (volume / self.cap) ** cost.beta)

    def beckmann(self, volume: np.ndarray, cost: LinkCostModel) -> float:
        # integral of BPR from 0 to v: t0*(v + alpha/(beta+1) * v^(beta+1)/c^beta)
        b = cost.beta
        terms = self.t0 * (
            volume + cost.alpha / (b + 1.0) * volume * (volume / self.cap) ** b
        )
        return float(terms.sum())


def _shortest_paths(
    graph: _Graph, origin: int, times: np.ndarray, targets: set[int]
) -> dict[int, tuple[float, tuple[int, ...]]]:
    """Dijkstra from origin; returns {target: (cost, link-id path)}.

    Heap entries carry the node sequence so that exact cost ties settle on
    the lexicographically smallest sequence, then the smallest link ids.
    """
    settled: dict[int, tuple[float, tuple[int, ...]]] = {}
    remaining = set(targets)
    heap: list[tuple[float, tuple[int, ...], tuple[int, ...], int]] = [
        (0.0, (origin,), (), origin)
    ]
    while heap and remaining:
        dist, nodes, links, node = heapq.heappop(heap)
        if node in settled:
            continue
        settled[node] = (dist, links)
        remaining.discard(node)
        for li, head in graph.adj[node]:
            if head in settled:
                continue
            heapq.heappush(
                heap,
                (
                    dist + times[li],
                    nodes + (head,),
                    links + (graph.link_ids[li],),
                    head,
                ),
            )
    return {t: settled[t] for t in targets if t in settled}


def _all_or_nothing(
    graph: _Graph,
    od_by_origin: dict[int, list[ODEntry]],
    times: np.ndarray,
    check_connectivity: bool = False,
) -> tuple[np.ndarray, float, dict[tuple[int, int], PathKey]]:
    """Load every OD pair on its current shortest path.

    Returns (volumes, shortest-path travel time total, chosen path per OD).
    """
    volume = np.zeros(len(graph.link_ids))
    sptt = 0.0
    chosen: dict[tuple[int, int], PathKey] = {}
    missing: list[tuple[int, int]] = []
    for origin in sorted(od_by_origin):
        entries = od_by_origin[origin]
        targets = {e.destination for e in entries}
        paths = _shortest_paths(graph, origin, times, targets)
        for e in entries:
            got = paths.get(e.destination)
            if got is None:
                missing.append((e.origin, e.destination))
                continue
            cost, links = got
            sptt += cost * e.trips
            chosen[(e.origin, e.destination)] = links
            for lid in links:
                volume[graph.index[lid]] += e.trips
    if check_connectivity and missing:
        raise DisconnectedODError(missing)
    return volume, sptt, chosen


def _bisection_step(
    graph: _Graph, cost: LinkCostModel, x: np.ndarray, d: np.ndarray
) -> float:
    """Exact line search: argmin over [0,1] of Beckmann(x + lam*d)."""
    def slope(lam: float) -> float:
        # sum of exact elementwise products; np.dot's FMA would break the
        # sign symmetry that makes symmetric splits land exactly
        return float(np.sum(graph.times(x + lam * d, cost) * d))

    if slope(0.0) >= 0.0:
        return 0.0
    if slope(1.0) <= 0.0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        s = slope(mid)
        if s == 0.0:
            return mid
        if s > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-14:
            break
    return 0.5 * (lo + hi)


def solve_ue(
    road: RoadNetwork,
    od_slice: list[ODEntry],
    cost: LinkCostModel = LinkCostModel(),
    tol: float = 1e-4,
    max_iter: int = 500,
    retain_paths: bool = False,
) -> AssignmentResult:
    """Frank-Wolfe user equilibrium for one time slice.

    Stops when the relative gap drops to tol or max_iter is hit;
    non-convergence is visible through relative_gap, not an error.
    """
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    graph = _Graph(road)
    od_by_origin: dict[int, list[ODEntry]] = {}
    for e in od_slice:
        if e.trips > 0:
            od_by_origin.setdefault(e.origin, []).append(e)

    if not od_by_origin:
        return AssignmentResult(
            link_volume={lid: 0.0 for lid in graph.link_ids},
            relative_gap=0.0,
            iterations=0,
            od_path_flows={} if retain_paths else None,
            gap_history=(),
            objective_history=(),
        )

    path_flows: dict[tuple[int, int], dict[PathKey, float]] = {}
    times = graph.times(np.zeros(len(graph.link_ids)), cost)
    x, _, chosen = _all_or_nothing(graph, od_by_origin, times, check_connectivity=True)
    if retain_paths:
        for (o, d), links in chosen.items():
            trips = sum(e.trips for e in od_by_origin[o] if e.destination == d)
            path_flows[(o, d)] = {links: trips}

    def measure_gap(vol: np.ndarray):
        t = graph.times(vol, cost)
        y, sptt, picked = _all_or_nothing(graph, od_by_origin, t)
        tstt = float(np.dot(t, vol))
        return ((tstt - sptt) / sptt if sptt > 0 else 0.0), y, picked

    gap = math.inf
    gaps: list[float] = []
    objectives: list[float] = [graph.beckmann(x, cost)]
    iterations = 0
    for iterations in range(1, max_iter + 1):
        gap, y, chosen = measure_gap(x)
        gaps.append(gap)
        if gap <= tol:
            break
        if iterations == max_iter:
            break  # budget spent; gap above reflects the returned volumes
        lam = _bisection_step(graph, cost, x, y - x)
        x = x + lam * (y - x)
        objectives.append(graph.beckmann(x, cost))
        if retain_paths and lam > 0.0:
            for (o, d), links in chosen.items():
                flows = path_flows[(o, d)]
                trips = sum(e.trips for e in od_by_origin[o] if e.destination == d)
                for key in flows:
                    flows[key] *= 1.0 - lam
                flows[links] = flows.get(links, 0.0) + lam * trips

    if retain_paths:
        # Renormalize each OD's flows onto its demand, rebuild volumes from
        # the path flows so attribution sums exactly, then equilibrate the
        # retained paths: Frank-Wolfe leaves stale near-zero flow on
        # abandoned paths, and the pairwise shifts below drain it properly.
        for (o, d), flows in path_flows.items():
            trips = sum(e.trips for e in od_by_origin[o] if e.destination == d)
            total = sum(flows.values())
            if total > 0:
                scale = trips / total
                for key in flows:
                    flows[key] *= scale
        x = np.zeros(len(graph.link_ids))
        for flows in path_flows.values():
            for links, flow in flows.items():
                for lid in links:
                    x[graph.index[lid]] += flow
        x = _equilibrate_paths(graph, cost, path_flows, x)
        gap = measure_gap(x)[0]

    return AssignmentResult(
        link_volume={lid: float(x[i]) for i, lid in enumerate(graph.link_ids)},
        relative_gap=gap if gaps else 0.0,
        iterations=iterations,
        od_path_flows=path_flows if retain_paths else None,
        gap_history=tuple(gaps),
        objective_history=tuple(objectives),
    )


def _equilibrate_paths(
    graph: _Graph,
    cost: LinkCostModel,
    path_flows: dict[tuple[int, int], dict[PathKey, float]],
    x: np.ndarray,
    rounds: int = 12,
) -> np.ndarray:
    """Pairwise flow shifts until every OD's retained paths cost the same.

    For each OD, flow moves from costlier paths onto the cheapest one; the
    shift size is the exact 1-D equalizer over the symmetric-difference
    links (bisection), so the Beckmann objective never increases. Paths
    drained to zero drop out; what remains is the used-path set.
    """
    def path_time(links: PathKey) -> float:
        return sum(
            graph.t0[graph.index[l]]
            * (1.0 + cost.alpha * (x[graph.index[l]] / graph.cap[graph.index[l]]) ** cost.beta)
            for l in links
        )

    for _ in range(rounds):
        moved = False
        for od_key in sorted(path_flows):
            flows = path_flows[od_key]
            if len(flows) < 2:
                continue
            costs = {p: path_time(p) for p in flows}
            cheapest = min(flows, key=lambda p: (costs[p], p))
            for p in sorted(flows):
                if p == cheapest or flows[p] <= 0.0:
                    continue
                only_p = [graph.index[l] for l in p if l not in set(cheapest)]
                only_q = [graph.index[l] for l in cheapest if l not in set(p)]

                def imbalance(delta: float) -> float:
                    c_p = sum(
                        graph.t0[i] * (1.0 + cost.alpha * ((x[i] - delta) / graph.cap[i]) ** cost.beta)
                        for i in only_p
                    )
                    c_q = sum(
                        graph.t0[i] * (1.0 + cost.alpha * ((x[i] + delta) / graph.cap[i]) ** cost.beta)
                        for i in only_q
                    )
                    return c_p - c_q

                if imbalance(0.0) <= 0.0:
                    continue
                hi = flows[p]
                if imbalance(hi) >= 0.0:
                    delta = hi
                else:
                    lo = 0.0
                    for _ in range(80):
                        mid = 0.5 * (lo + hi)
                        if imbalance(mid) > 0.0:
                            lo = mid
                        else:
                            hi = mid
                        if hi - lo <= 1e-15 * max(1.0, flows[p]):
                            break
                    delta = 0.5 * (lo + hi)
                if delta <= 0.0:
                    continue
                for i in only_p:
                    x[i] -= delta
                for i in only_q:
                    x[i] += delta
                flows[p] -= delta
                flows[cheapest] += delta
                if flows[p] <= 1e-12 * max(1.0, flows[cheapest]):
                    # return the residue to the cheapest path and drop p
                    residue = flows.pop(p)
                    flows[cheapest] += residue
                    for l in p:
                        x[graph.index[l]] -= residue
                    for l in cheapest:
                        x[graph.index[l]] += residue
                moved = True
                costs[cheapest] = path_time(cheapest)
        if not moved:
            break
    np.maximum(x, 0.0, out=x)
    return x


def link_times(
    road: RoadNetwork, volumes: dict[int, float], cost: LinkCostModel = LinkCostModel()
) -> dict[int, float]:
    """BPR travel time per link at the given volumes."""
    graph = _Graph(road)
    v = np.array([volumes[lid] for lid in graph.link_ids])
    t = graph.times(v, cost)
    return {lid: float(t[i]) for i, lid in enumerate(graph.link_ids)}


def shortest_path_cost(
    road: RoadNetwork,
    origin: int,
    destination: int,
    volumes: dict[int, float],
    cost: LinkCostModel = LinkCostModel(),
) -> float:
    """Cheapest OD travel time at fixed volumes (inf when unreachable)."""
    graph = _Graph(road)
    v = np.array([volumes[lid] for lid in graph.link_ids])
    times = graph.times(v, cost)
    got = _shortest_paths(graph, origin, times, {destination})
    return got[destination][0] if destination in got else math.inf


def path_cost(
    road: RoadNetwork,
    links: PathKey,
    volumes: dict[int, float],
    cost: LinkCostModel = LinkCostModel(),
) -> float:
    times = link_times(road, volumes, cost)
    return sum(times[lid] for lid in links)


def accrue_demand(
    result: AssignmentResult,
    road: RoadNetwork,
    coupling: CouplingMap,
    ev_share: float,
) -> dict[int, float]:
    """Charging demand per node, kWh: rho * ev_share * inbound volume * kWh/veh.

    Vehicles are counted at the node their link ends at, so the total obeys
    sum(CD) = rho * ev_share * energy * sum(volumes).
    """
    rho = coupling.charge_propensity
    energy = coupling.energy_per_vehicle
    demand = {n.id: 0.0 for n in road.nodes}
    for link in road.links:
        demand[link.to_node] += rho * ev_share * result.link_volume[link.id] * energy
    return demand


def station_attribution(
    result: AssignmentResult,
    road: RoadNetwork,
    station_node: int,
    coupling: CouplingMap,
    ev_share: float,
) -> dict[int, float]:
    """Per-link volume attributable to vehicles passing the station's node.

    Sums used-path flows whose node sequence visits station_node, scaled by
    rho * ev_share (the charging share of the passing traffic).
    """
    if result.od_path_flows is None:
        raise ValueError("solve_ue must run with retain_paths=True for attribution")
    if station_node not in {n.id for n in road.nodes}:
        raise KeyError(f"unknown node {station_node}")
    by_id = road.link_by_id()
    scale = coupling.charge_propensity * ev_share
    out = {l.id: 0.0 for l in road.links}
    for (origin, _), flows in result.od_path_flows.items():
        for links, flow in flows.items():
            if flow <= 0.0:
                continue
            visited = {origin}
            for lid in links:
                visited.add(by_id[lid].to_node)
            if station_node not in visited:
                continue
            for lid in links:
                out[lid] += scale * flow
    return out

"""Traffic hotspots: Louvain communities on the volume-weighted road graph.

The clustered graph is the undirected projection of the road network,
edge weight = the two directional volumes summed, nodes with zero incident
volume left out. Louvain is implemented here rather than imported so node
visits run in ascending id order and results are reproducible bit-for-bit.

Hotspots of adjacent slices link by Jaccard similarity over their node
sets (shared intersections, normalized to stay comparable across sizes).
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import ChargingStation, RoadNetwork, SliceState, TimeSlicedState


@dataclass(frozen=True)
class Hotspot:
    id: str
    slice: str
    nodes: frozenset[int]
    links: tuple[int, ...]       # directed link ids internal to the hotspot
    avg_volume: float            # mean volume of internal links
    area_size: int               # node count
    demand_share: float          # member demand / total slice demand
    served_share: float          # member stations' served demand / total
    rank: int                    # 1-based by avg_volume


@dataclass(frozen=True)
class HotspotLink:
    from_id: str
    to_id: str
    similarity: float


@dataclass(frozen=True)
class HotspotTimeline:
    hotspots: tuple[Hotspot, ...]
    links: tuple[HotspotLink, ...]


# ---------------------------------------------------------------------------
# Louvain
# ---------------------------------------------------------------------------

def modularity(
    weights: dict[tuple[int, int], float],
    partition: dict[int, int],
    resolution: float = 1.0,
) -> float:
    """Direct modularity of a partition on an undirected simple graph.

    weights maps unordered pairs (u < v) to positive edge weight; partition
    maps node -> community label. Uses Q = sum_c [in_c/m - g*(tot_c/2m)^2]
    with m the total edge weight.
    """
    m = sum(weights.values())
    if m <= 0:
        return 0.0
    degree: dict[int, float] = {}
    internal: dict[int, float] = {}
    tot: dict[int, float] = {}
    for (u, v), w in weights.items():
        degree[u] = degree.get(u, 0.0) + w
        degree[v] = degree.get(v, 0.0) + w
        if partition[u] == partition[v]:
            internal[partition[u]] = internal.get(partition[u], 0.0) + w
    for node, k in degree.items():
        c = partition[node]
        tot[c] = tot.get(c, 0.0) + k
    q = 0.0
    for c in tot:
        q += internal.get(c, 0.0) / m - resolution * (tot[c] / (2.0 * m)) ** 2
    return q


def louvain(
    weights: dict[tuple[int, int], float],
    resolution: float = 1.0,
) -> tuple[dict[int, int], list[float]]:
    """Greedy modularity maximization; returns (partition, per-pass trace).

    Deterministic: local moves visit nodes in ascending id; ties between
    candidate communities break on the lowest community label. Community
    labels in the result are the smallest member node ids.
    """
    nodes = sorted({n for pair in weights for n in pair})
    if not nodes:
        return {}, []
    # current coarse graph: neighbor weights and self-loops per super-node
    nbr: dict[int, dict[int, float]] = {n: {} for n in nodes}
    self_w: dict[int, float] = {n: 0.0 for n in nodes}
    for (u, v), w in weights.items():
        nbr[u][v] = nbr[u].get(v, 0.0) + w
        nbr[v][u] = nbr[v].get(u, 0.0) + w
    member_of: dict[int, int] = {n: n for n in nodes}  # original -> super-node
    m = sum(weights.values())
    trace: list[float] = []

    while True:
        comm, moved = _local_moves(nbr, self_w, m, resolution)
        partition = {orig: comm[sup] for orig, sup in member_of.items()}
        trace.append(modularity(weights, partition, resolution))
        if not moved:
            break
        # aggregate communities into super-nodes labeled by smallest member
        groups: dict[int, list[int]] = {}
        for sup, c in comm.items():
            groups.setdefault(c, []).append(sup)
        label = {c: min(g) for c, g in groups.items()}
        new_nbr: dict[int, dict[int, float]] = {label[c]: {} for c in groups}
        new_self: dict[int, float] = {label[c]: 0.0 for c in groups}
        for c, g in groups.items():
            lc = label[c]
            for sup in g:
                new_self[lc] += self_w[sup]
                for other, w in nbr[sup].items():
                    oc = label[comm[other]]
                    if oc == lc:
                        new_self[lc] += 0.5 * w  # both directions visit here
                    else:
                        new_nbr[lc][oc] = new_nbr[lc].get(oc, 0.0) + w
        nbr, self_w = new_nbr, new_self
        member_of = {orig: label[comm[sup]] for orig, sup in member_of.items()}

    final = {orig: member_of[orig] for orig in member_of}
    # relabel by smallest original member for stable output
    groups2: dict[int, list[int]] = {}
    for orig, c in final.items():
        groups2.setdefault(c, []).append(orig)
    relabel = {c: min(g) for c, g in groups2.items()}
    return {orig: relabel[c] for orig, c in final.items()}, trace


def _local_moves(
    nbr: dict[int, dict[int, float]],
    self_w: dict[int, float],
    m: float,
    resolution: float,
) -> tuple[dict[int, int], bool]:
    """One Louvain level: sweep ascending-id until no node improves."""
    comm = {n: n for n in nbr}
    degree = {n: 2.0 * self_w[n] + sum(nbr[n].values()) for n in nbr}
    tot = {n: degree[n] for n in nbr}
    moved_any = False
    improved = True
    while improved:
        improved = False
        for node in sorted(nbr):
            here = comm[node]
            tot[here] -= degree[node]
            w_to: dict[int, float] = {}
            for other, w in nbr[node].items():
                w_to[comm[other]] = w_to.get(comm[other], 0.0) + w
            best_c, best_gain = here, w_to.get(here, 0.0) - (
                resolution * tot[here] * degree[node] / (2.0 * m)
            )
            for c in sorted(w_to):
                if c == here:
                    continue
                gain = w_to[c] - resolution * tot[c] * degree[node] / (2.0 * m)
                if gain > best_gain + 1e-12 or (
                    abs(gain - best_gain) <= 1e-12 and c < best_c
                ):
                    best_c, best_gain = c, gain
            comm[node] = best_c
            tot[best_c] += degree[node]
            if best_c != here:
                improved = True
                moved_any = True
    return comm, moved_any


# ---------------------------------------------------------------------------
# Hotspot detection and linking
# ---------------------------------------------------------------------------

def volume_weights(road: RoadNetwork, link_volume: dict[int, float]) -> dict[tuple[int, int], float]:
    """Undirected projection: unordered endpoints -> summed direction volume."""
    weights: dict[tuple[int, int], float] = {}
    for link in road.links:
        v = link_volume.get(link.id, 0.0)
        if v <= 0.0 or link.from_node == link.to_node:
            continue
        key = (min(link.from_node, link.to_node), max(link.from_node, link.to_node))
        weights[key] = weights.get(key, 0.0) + v
    return weights


def detect_hotspots(
    state: SliceState,
    road: RoadNetwork,
    stations: tuple[ChargingStation, ...] | list[ChargingStation],
    k: int,
    resolution: float = 1.0,
) -> list[Hotspot]:
    """Top-k communities of the slice by average internal link volume."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    weights = volume_weights(road, state.link_volume)
    partition, _ = louvain(weights, resolution)
    groups: dict[int, set[int]] = {}
    for node, c in partition.items():
        groups.setdefault(c, set()).add(node)

    total_demand = state.total_demand()
    station_node = {st.node: st.id for st in stations}
    scored = []
    for c, members in groups.items():
        internal = [
            l for l in road.links
            if l.from_node in members and l.to_node in members
            and state.link_volume.get(l.id, 0.0) > 0.0
        ]
        avg = (
            sum(state.link_volume[l.id] for l in internal) / len(internal)
            if internal
            else 0.0
        )
        demand = sum(state.node_demand.get(n, 0.0) for n in members)
        served = sum(
            state.station_served.get(station_node[n], 0.0)
            for n in members
            if n in station_node
        )
        scored.append((avg, min(members), members, internal, demand, served))
    scored.sort(key=lambda item: (-item[0], item[1]))

    out: list[Hotspot] = []
    for rank, (avg, _, members, internal, demand, served) in enumerate(
        scored[:k], start=1
    ):
        out.append(
            Hotspot(
                id=f"{state.slice}:{rank}",
                slice=state.slice,
                nodes=frozenset(members),
                links=tuple(sorted(l.id for l in internal)),
                avg_volume=avg,
                area_size=len(members),
                demand_share=demand / total_demand if total_demand > 0 else 0.0,
                served_share=served / total_demand if total_demand > 0 else 0.0,
                rank=rank,
            )
        )
    return out


def link_hotspots(
    prev: list[Hotspot], nxt: list[Hotspot], threshold: float = 0.1
) -> list[HotspotLink]:
    """Jaccard similarity over node sets between adjacent slices."""
    out: list[HotspotLink] = []
    for a in prev:
        for b in nxt:
            union = len(a.nodes | b.nodes)
            if union == 0:
                continue
            similarity = len(a.nodes & b.nodes) / union
            if similarity >= threshold:
                out.append(HotspotLink(a.id, b.id, similarity))
    return out


def build_timeline(
    state: TimeSlicedState,
    road: RoadNetwork,
    stations: tuple[ChargingStation, ...] | list[ChargingStation],
    k: int,
    resolution: float = 1.0,
    link_threshold: float = 0.1,
) -> HotspotTimeline:
    per_slice = [
        detect_hotspots(s, road, stations, k, resolution) for s in state.slices
    ]
    links: list[HotspotLink] = []
    for prev, nxt in zip(per_slice, per_slice[1:]):
        links.extend(link_hotspots(prev, nxt, link_threshold))
    return HotspotTimeline(
        hotspots=tuple(h for slice_hs in per_slice for h in slice_hs),
        links=tuple(links),
    )

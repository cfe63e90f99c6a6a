"""Independent reference implementations the tests check the solvers against.

Nothing here shares code with the package's solvers: shortest paths come
from scipy, equilibrium from plain MSA averaging, LP optima from vertex
enumeration, modularity from the textbook double sum. Keep it that way;
the point of these oracles is that they can disagree with the package.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as sp_dijkstra

from chargeplan.model import ODEntry, RoadNetwork


def msa_equilibrium(
    road: RoadNetwork,
    od: list[ODEntry],
    alpha: float = 0.15,
    beta: float = 4.0,
    gap_target: float = 1e-6,
    max_iterations: int = 500_000,
) -> tuple[np.ndarray, float]:
    """Method-of-successive-averages equilibrium (volumes in link order).

    Only valid on networks without parallel links (csr would merge them).
    """
    nodes = sorted(n.id for n in road.nodes)
    pos = {n: i for i, n in enumerate(nodes)}
    links = list(road.links)
    seen_pairs = set()
    for l in links:
        pair = (l.from_node, l.to_node)
        assert pair not in seen_pairs, "oracle cannot handle parallel links"
        seen_pairs.add(pair)
    t0v = np.array([l.free_flow_time for l in links])
    cap = np.array([l.capacity for l in links])
    rows = [pos[l.from_node] for l in links]
    cols = [pos[l.to_node] for l in links]
    edge_of = {(pos[l.from_node], pos[l.to_node]): i for i, l in enumerate(links)}
    by_origin: dict[int, list[tuple[int, float]]] = {}
    for e in od:
        if e.trips > 0:
            by_origin.setdefault(pos[e.origin], []).append((pos[e.destination], e.trips))
    if not by_origin:
        return np.zeros(len(links)), 0.0

    def times(v: np.ndarray) -> np.ndarray:
        return t0v * (1.0 + alpha * (v / cap) ** beta)

    def all_or_nothing(t: np.ndarray) -> tuple[np.ndarray, float]:
        graph = csr_matrix((t, (rows, cols)), shape=(len(nodes), len(nodes)))
        y = np.zeros(len(links))
        sptt = 0.0
        origins = sorted(by_origin)
        dist, pred = sp_dijkstra(graph, indices=origins, return_predecessors=True)
        for oi, origin in enumerate(origins):
            for dest, trips in by_origin[origin]:
                assert math.isfinite(dist[oi, dest]), "disconnected OD in oracle"
                sptt += dist[oi, dest] * trips
                node = dest
                while node != origin:
                    prev = pred[oi, node]
                    y[edge_of[(prev, node)]] += trips
                    node = prev
        return y, sptt

    volume, _ = all_or_nothing(times(np.zeros(len(links))))
    gap = math.inf
    for k in range(2, max_iterations + 1):
        t = times(volume)
        y, sptt = all_or_nothing(t)
        gap = (float(t @ volume) - sptt) / sptt
        if gap <= gap_target:
            break
        volume = volume + (y - volume) / k
    return volume, gap


def lp_vertex_optimum(c, A_eq, b_eq, A_ub, b_ub, bounds):
    """Brute-force LP: enumerate basic solutions of the tightened system.

    Treats bounds as explicit inequality rows, enumerates every square
    subsystem of active constraints, keeps feasible solutions, and returns
    (best x, objective). Exponential; use only on tiny problems.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    rows = []
    rhs = []
    kinds = []  # 'eq' or 'ub'
    if A_eq is not None:
        for row, b in zip(np.atleast_2d(A_eq), np.atleast_1d(b_eq)):
            rows.append(np.asarray(row, dtype=float))
            rhs.append(float(b))
            kinds.append("eq")
    if A_ub is not None:
        for row, b in zip(np.atleast_2d(A_ub), np.atleast_1d(b_ub)):
            rows.append(np.asarray(row, dtype=float))
            rhs.append(float(b))
            kinds.append("ub")
    for j, (lo, hi) in enumerate(bounds):
        if lo != -np.inf:
            e = np.zeros(n)
            e[j] = -1.0
            rows.append(e)
            rhs.append(-lo)
            kinds.append("ub")
        if hi != np.inf:
            e = np.zeros(n)
            e[j] = 1.0
            rows.append(e)
            rhs.append(hi)
            kinds.append("ub")
    rows = np.array(rows)
    rhs = np.array(rhs)
    eq_idx = [i for i, k in enumerate(kinds) if k == "eq"]
    ub_idx = [i for i, k in enumerate(kinds) if k == "ub"]

    best_x, best_obj = None, math.inf
    need = n - len(eq_idx)
    if need < 0:
        return None, math.inf
    for active in itertools.combinations(ub_idx, need):
        idx = eq_idx + list(active)
        A = rows[idx]
        if np.linalg.matrix_rank(A) < n:
            continue
        try:
            x = np.linalg.solve(A, rhs[idx])
        except np.linalg.LinAlgError:
            continue
        if np.all(rows[ub_idx] @ x <= rhs[ub_idx] + 1e-7) and np.all(
            np.abs(rows[eq_idx] @ x - rhs[eq_idx]) <= 1e-7
        ):
            obj = float(c @ x)
            if obj < best_obj - 1e-12:
                best_x, best_obj = x, obj
    return best_x, best_obj


def lp_vertex_duals(c, A_eq, b_eq, A_ub, b_ub, bounds, x):
    """Duals at a non-degenerate optimal vertex, from the KKT equations.

    Builds the active constraint rows at x and solves A_active^T lambda = c;
    returns the lambda entries for the equality rows. Requires exactly n
    active constraints (non-degenerate vertex) or raises.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    rows = []
    which = []
    if A_eq is not None:
        for i, row in enumerate(np.atleast_2d(A_eq)):
            rows.append(np.asarray(row, dtype=float))
            which.append(("eq", i))
    if A_ub is not None:
        for i, (row, b) in enumerate(zip(np.atleast_2d(A_ub), np.atleast_1d(b_ub))):
            if abs(float(np.asarray(row) @ x) - float(b)) <= 1e-7:
                rows.append(np.asarray(row, dtype=float))
                which.append(("ub", i))
    for j, (lo, hi) in enumerate(bounds):
        e = np.zeros(n)
        e[j] = 1.0
        if lo != -np.inf and abs(x[j] - lo) <= 1e-7:
            rows.append(e)
            which.append(("lo", j))
        elif hi != np.inf and abs(x[j] - hi) <= 1e-7:
            rows.append(e)
            which.append(("hi", j))
    A = np.array(rows)
    if A.shape[0] != n:
        raise ValueError(f"vertex is degenerate: {A.shape[0]} active rows for {n} vars")
    lam = np.linalg.solve(A.T, c)
    return {
        ("eq", i): lam[k] for k, (kind, i) in enumerate(which) if kind == "eq"
    }


def modularity_direct(weights: dict[tuple[int, int], float], partition: dict[int, int]) -> float:
    """Q via the ordered double sum over the adjacency matrix."""
    nodes = sorted({n for pair in weights for n in pair})
    index = {n: i for i, n in enumerate(nodes)}
    a = np.zeros((len(nodes), len(nodes)))
    for (u, v), w in weights.items():
        a[index[u], index[v]] += w
        a[index[v], index[u]] += w
    two_m = a.sum()
    if two_m == 0:
        return 0.0
    k = a.sum(axis=1)
    q = 0.0
    for u in nodes:
        for v in nodes:
            if partition[u] == partition[v]:
                i, j = index[u], index[v]
                q += a[i, j] - k[i] * k[j] / two_m
    return q / two_m


def nearest_station_bruteforce(road, node_demand, stations, radius):
    """All-pairs Dijkstra by scipy, then exhaustive nearest-station scan."""
    nodes = sorted(n.id for n in road.nodes)
    pos = {n: i for i, n in enumerate(nodes)}
    rows = [pos[l.from_node] for l in road.links]
    cols = [pos[l.to_node] for l in road.links]
    lengths = [l.length for l in road.links]
    graph = csr_matrix((lengths, (rows, cols)), shape=(len(nodes), len(nodes)))
    dist = sp_dijkstra(graph)  # dist[i, j]: i -> j over directed links
    out: dict[int, str] = {}
    for nid in sorted(node_demand):
        if node_demand[nid] <= 0:
            continue
        best = None
        for st in sorted(stations, key=lambda s: s.id):
            d = dist[pos[nid], pos[st.node]]
            if d <= radius and (best is None or (d, st.id) < best):
                best = (d, st.id)
        out[nid] = best[1] if best else "unserved"
    return out


def shortest_path_cost_scipy(road, origin, destination, volumes, alpha=0.15, beta=4.0):
    nodes = sorted(n.id for n in road.nodes)
    pos = {n: i for i, n in enumerate(nodes)}
    t = [
        l.free_flow_time * (1.0 + alpha * (volumes[l.id] / l.capacity) ** beta)
        for l in road.links
    ]
    rows = [pos[l.from_node] for l in road.links]
    cols = [pos[l.to_node] for l in road.links]
    graph = csr_matrix((t, (rows, cols)), shape=(len(nodes), len(nodes)))
    dist = sp_dijkstra(graph, indices=[pos[origin]])
    return float(dist[0, pos[destination]])

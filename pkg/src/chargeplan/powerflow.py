"""Linear optimal power flow per time slice.

DC approximation: lossless lines, linear generation costs, angles as free
variables, slack angle pinned to zero. Bus prices are the duals of the bus
balance rows. Voltage is a post-hoc linear estimate (this model has no AC
solution): the slack bus sits at its v_max and every other bus drops by
drop_coefficient * electrical distance from the slack * its served load,
clamped into [v_min, v_max] with the pre-clamp excess recorded.

When charging load exceeds what the grid can deliver, all charging buses
are scaled back by one common served fraction (base load is never shed);
the slice stays feasible and served_fraction < 1 records the shortfall.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .lp import INFEASIBLE, OPTIMAL, solve_lp
from .model import PowerGridCase


class StructurallyInfeasibleError(ValueError):
    """A grid component has load but no generation path at all."""


@dataclass(frozen=True)
class VoltageModel:
    drop_coefficient: float = 0.001  # per-unit voltage per (pu reactance * MW)


@dataclass(frozen=True)
class OpfResult:
    bus_load: dict[int, float]        # MW actually served (base + kept charging)
    bus_voltage: dict[int, float]     # per-unit estimate, clamped
    bus_price: dict[int, float]       # $/MWh, dual of the bus balance
    generation: dict[int, float]      # MW per generator bus
    line_flow: dict[int, float]       # MW per line index, positive from->to
    shed: dict[int, float]            # MW of charging load dropped per bus
    served_fraction: dict[int, float] # per charging bus, 1.0 elsewhere
    voltage_violation: dict[int, float]  # pre-clamp excess, 0 when in band
    feasible: bool
    cost: float
    dual_cost: float

    def total_generation(self) -> float:
        return sum(self.generation.values())

    def total_shed(self) -> float:
        return sum(self.shed.values())


def _check_structure(grid: PowerGridCase, charging_load: dict[int, float]) -> None:
    """Reject grids where some component carries load but owns no generator."""
    parent = {b.id: b.id for b in grid.buses}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for line in grid.lines:
        parent[find(line.from_bus)] = find(line.to_bus)
    load: dict[int, float] = {}
    has_gen: dict[int, bool] = {}
    for bus in grid.buses:
        root = find(bus.id)
        load[root] = load.get(root, 0.0) + bus.base_load + charging_load.get(bus.id, 0.0)
        has_gen[root] = has_gen.get(root, False) or (bus.is_generator and bus.gen_max > 0)
    for root, total in load.items():
        if total > 0 and not has_gen.get(root, False):
            raise StructurallyInfeasibleError(
                f"component of bus {root} has {total:.6g} MW load and no generation"
            )


def _build_lp(grid: PowerGridCase, load: dict[int, float], charge: dict[int, float],
              maximize_tau: bool):
    """Assemble the DC-OPF LP; returns matrices plus column bookkeeping.

    Columns: generator outputs, then tau (only in the maximize stage), then
    one free angle per non-slack bus. Rows: one balance equality per bus
    (generation - net export - tau*charge = base load), then two flow-limit
    inequalities per limited line.
    """
    buses = list(grid.buses)
    bus_pos = {b.id: i for i, b in enumerate(buses)}
    gens = [b for b in buses if b.is_generator]
    n_gen = len(gens)
    has_tau = maximize_tau
    tau_col = n_gen if has_tau else None
    ang0 = n_gen + (1 if has_tau else 0)
    ang_col = {}
    k = ang0
    for b in buses:
        if b.id != grid.slack_bus:
            ang_col[b.id] = k
            k += 1
    n_cols = k

    A_eq = np.zeros((len(buses), n_cols))
    b_eq = np.zeros(len(buses))
    for gi, g in enumerate(gens):
        A_eq[bus_pos[g.id], gi] = 1.0
    for line in grid.lines:
        # flow = susceptance * (theta_from - theta_to); export subtracts
        for bus_id, sign_from in ((line.from_bus, -1.0), (line.to_bus, 1.0)):
            row = bus_pos[bus_id]
            if line.from_bus != grid.slack_bus:
                A_eq[row, ang_col[line.from_bus]] += sign_from * line.susceptance
            if line.to_bus != grid.slack_bus:
                A_eq[row, ang_col[line.to_bus]] -= sign_from * line.susceptance
    for b in buses:
        row = bus_pos[b.id]
        if has_tau:
            A_eq[row, tau_col] = -charge.get(b.id, 0.0)
            b_eq[row] = b.base_load
        else:
            b_eq[row] = load[b.id]

    A_ub_rows = []
    b_ub_rows = []
    limited_lines = []
    for li, line in enumerate(grid.lines):
        if line.limit <= 0:
            continue  # convention: non-positive limit means unconstrained
        limited_lines.append(li)
        row = np.zeros(n_cols)
        if line.from_bus != grid.slack_bus:
            row[ang_col[line.from_bus]] = line.susceptance
        if line.to_bus != grid.slack_bus:
            row[ang_col[line.to_bus]] = -line.susceptance
        A_ub_rows.append(row.copy())
        b_ub_rows.append(line.limit)
        A_ub_rows.append(-row)
        b_ub_rows.append(line.limit)

    bounds: list[tuple[float, float]] = [(g.gen_min, g.gen_max) for g in gens]
    if has_tau:
        bounds.append((0.0, 1.0))
    bounds.extend([(-np.inf, np.inf)] * len(ang_col))

    A_ub = np.array(A_ub_rows) if A_ub_rows else None
    b_ub = np.array(b_ub_rows) if b_ub_rows else None
    return buses, bus_pos, gens, tau_col, ang_col, A_eq, b_eq, A_ub, b_ub, bounds


def solve_opf(
    grid: PowerGridCase,
    charging_load: dict[int, float] | None = None,
    voltage_model: VoltageModel = VoltageModel(),
) -> OpfResult:
    """Serve base plus charging load at minimum cost; prices from duals."""
    charging_load = charging_load or {}
    for bus_id, mw in charging_load.items():
        if mw < 0:
            raise ValueError(f"charging load at bus {bus_id} is negative: {mw}")
    _check_structure(grid, charging_load)

    charge = {b.id: charging_load.get(b.id, 0.0) for b in grid.buses}
    charging_buses = [bid for bid, mw in charge.items() if mw > 0]

    # stage 1: the largest common fraction of charging load the grid can take
    (buses, bus_pos, gens, tau_col, ang_col,
     A_eq, b_eq, A_ub, b_ub, bounds) = _build_lp(grid, {}, charge, maximize_tau=True)
    c1 = np.zeros(len(bounds))
    c1[tau_col] = -1.0
    stage1 = solve_lp(c1, A_eq, b_eq, A_ub, b_ub, bounds)
    if stage1.status == INFEASIBLE:
        zeros = {b.id: 0.0 for b in buses}
        return OpfResult(
            bus_load=zeros,
            bus_voltage={b.id: b.v_min for b in buses},
            bus_price=dict(zeros),
            generation={g.id: 0.0 for g in gens},
            line_flow={i: 0.0 for i in range(len(grid.lines))},
            shed=dict(charge),
            served_fraction={bid: 0.0 for bid in charging_buses},
            voltage_violation=dict(zeros),
            feasible=False,
            cost=math.inf,
            dual_cost=math.inf,
        )
    if stage1.status != OPTIMAL:
        raise RuntimeError(f"stage-1 OPF came back {stage1.status}")
    tau = float(stage1.x[tau_col])
    if tau > 1.0 - 1e-9:
        tau = 1.0

    # stage 2: least-cost dispatch at the served load
    load = {b.id: b.base_load + tau * charge[b.id] for b in buses}
    (buses, bus_pos, gens, _, ang_col,
     A_eq, b_eq, A_ub, b_ub, bounds) = _build_lp(grid, load, charge, maximize_tau=False)
    c2 = np.zeros(len(bounds))
    for gi, g in enumerate(gens):
        c2[gi] = g.gen_cost
    stage2 = solve_lp(c2, A_eq, b_eq, A_ub, b_ub, bounds)
    if stage2.status != OPTIMAL:
        raise RuntimeError(f"stage-2 OPF came back {stage2.status} at tau={tau}")

    x = stage2.x
    generation = {g.id: float(x[gi]) for gi, g in enumerate(gens)}
    angles = {grid.slack_bus: 0.0}
    for bid, col in ang_col.items():
        angles[bid] = float(x[col])
    line_flow = {
        li: float(l.susceptance * (angles[l.from_bus] - angles[l.to_bus]))
        for li, l in enumerate(grid.lines)
    }
    prices = {b.id: float(stage2.duals_eq[bus_pos[b.id]]) for b in buses}
    voltage, violation = _estimate_voltage(grid, load, voltage_model)
    return OpfResult(
        bus_load=load,
        bus_voltage=voltage,
        bus_price=prices,
        generation=generation,
        line_flow=line_flow,
        shed={b.id: (1.0 - tau) * charge[b.id] for b in buses},
        served_fraction={bid: tau for bid in charging_buses},
        voltage_violation=violation,
        feasible=True,
        cost=float(stage2.objective),
        dual_cost=float(stage2.dual_objective),
    )


def _estimate_voltage(
    grid: PowerGridCase, load: dict[int, float], model: VoltageModel
) -> tuple[dict[int, float], dict[int, float]]:
    """Linear drop estimate: v = slack v_max - k * distance * served load."""
    dist = electrical_distance(grid)
    by_id = grid.bus_by_id()
    slack_vmax = by_id[grid.slack_bus].v_max
    voltage: dict[int, float] = {}
    violation: dict[int, float] = {}
    for bus in grid.buses:
        d = dist.get(bus.id, math.inf)
        if math.isinf(d):
            raw = bus.v_min  # disconnected from slack: park at the floor
        else:
            raw = slack_vmax - model.drop_coefficient * d * load[bus.id]
        clamped = min(max(raw, bus.v_min), bus.v_max)
        voltage[bus.id] = clamped
        violation[bus.id] = abs(raw - clamped)
    return voltage, violation


def electrical_distance(grid: PowerGridCase) -> dict[int, float]:
    """Shortest path from the slack bus with 1/susceptance edge weights."""
    adj: dict[int, list[tuple[int, float]]] = {b.id: [] for b in grid.buses}
    for line in grid.lines:
        w = 1.0 / line.susceptance
        adj[line.from_bus].append((line.to_bus, w))
        adj[line.to_bus].append((line.from_bus, w))
    dist: dict[int, float] = {}
    heap: list[tuple[float, int]] = [(0.0, grid.slack_bus)]
    while heap:
        d, bus = heapq.heappop(heap)
        if bus in dist:
            continue
        dist[bus] = d
        for nxt, w in adj[bus]:
            if nxt not in dist:
                heapq.heappush(heap, (d + w, nxt))
    return dist


def nodal_price(result: OpfResult, bus: int) -> float:
    """Price at one bus; uniform and equal to the marginal cost when nothing binds."""
    if not result.feasible:
        raise ValueError("no prices on an infeasible result")
    if bus not in result.bus_price:
        raise KeyError(f"unknown bus {bus}")
    return result.bus_price[bus]

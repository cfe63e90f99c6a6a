from __future__ import annotations

import numpy as np
import pytest

from chargeplan.model import Bus, Line, PowerGridCase
from chargeplan.powerflow import (
    StructurallyInfeasibleError,
    VoltageModel,
    electrical_distance,
    nodal_price,
    solve_opf,
)
from chargeplan.synth import ieee14_case
from oracles import lp_vertex_duals, lp_vertex_optimum


def two_bus():
    return PowerGridCase(
        buses=(
            Bus(1, 0.0, 0.94, 1.06, is_generator=True, gen_min=0.0, gen_max=100.0, gen_cost=10.0),
            Bus(2, 30.0, 0.94, 1.06),
        ),
        lines=(Line(1, 2, 10.0, 50.0),),
        slack_bus=1,
    )


def three_bus_congested():
    """Cheap slack generator, expensive remote one, a tight line to the load."""
    return PowerGridCase(
        buses=(
            Bus(1, 0.0, 0.90, 1.10, is_generator=True, gen_min=0.0, gen_max=200.0, gen_cost=10.0),
            Bus(2, 0.0, 0.90, 1.10, is_generator=True, gen_min=0.0, gen_max=200.0, gen_cost=30.0),
            Bus(3, 90.0, 0.90, 1.10),
        ),
        lines=(
            Line(1, 2, 10.0, 500.0),
            Line(1, 3, 10.0, 40.0),
            Line(2, 3, 10.0, 500.0),
        ),
        slack_bus=1,
    )


def test_two_bus_hand_lp():
    result = solve_opf(two_bus())
    assert result.feasible
    assert result.generation[1] == pytest.approx(30.0, abs=1e-9)
    assert result.line_flow[0] == pytest.approx(30.0, abs=1e-9)
    assert result.bus_price[1] == pytest.approx(10.0, abs=1e-9)
    assert result.bus_price[2] == pytest.approx(10.0, abs=1e-9)
    assert result.cost == pytest.approx(300.0, abs=1e-9)


def test_zero_charging_load_equals_base_case():
    base = solve_opf(two_bus())
    loaded = solve_opf(two_bus(), {1: 0.0, 2: 0.0})
    assert base == loaded


def _three_bus_lp_parts(grid, load3):
    """The same LP the solver builds, written out by hand for the oracle."""
    # columns: g1, g2, theta2, theta3 (theta1 = 0); balance rows for buses
    # 1..3; line limit rows for each direction of the three lines.
    A_eq = [
        [1.0, 0.0, 10.0, 10.0],
        [0.0, 1.0, -20.0, 10.0],
        [0.0, 0.0, 10.0, -20.0],
    ]
    b_eq = [0.0, 0.0, load3]
    A_ub = []
    b_ub = []
    for row, limit in (
        ([0.0, 0.0, -10.0, 0.0], 500.0),   # 1->2
        ([0.0, 0.0, 0.0, -10.0], 40.0),    # 1->3
        ([0.0, 0.0, 10.0, -10.0], 500.0),  # 2->3
    ):
        A_ub.append(row)
        b_ub.append(limit)
        A_ub.append([-v for v in row])
        b_ub.append(limit)
    bounds = [(0.0, 200.0), (0.0, 200.0), (-np.inf, np.inf), (-np.inf, np.inf)]
    c = [10.0, 30.0, 0.0, 0.0]
    return c, A_eq, b_eq, A_ub, b_ub, bounds


def test_three_bus_congested_prices_match_vertex_oracle():
    grid = three_bus_congested()
    result = solve_opf(grid)
    assert result.feasible
    # the 1->3 line must actually bind for the case to be interesting
    assert result.line_flow[1] == pytest.approx(40.0, abs=1e-7)

    c, A_eq, b_eq, A_ub, b_ub, bounds = _three_bus_lp_parts(grid, 90.0)
    ref_x, ref_obj = lp_vertex_optimum(c, A_eq, b_eq, A_ub, b_ub, bounds)
    assert ref_x is not None
    assert result.cost == pytest.approx(ref_obj, abs=1e-7)
    duals = lp_vertex_duals(c, A_eq, b_eq, A_ub, b_ub, bounds, ref_x)
    for bus_index, bus_id in enumerate((1, 2, 3)):
        assert result.bus_price[bus_id] == pytest.approx(
            duals[("eq", bus_index)], abs=1e-9
        ), bus_id
    # congestion separates prices across the binding line
    assert result.bus_price[3] > result.bus_price[1] + 1.0


def test_nodal_price_uniform_when_uncongested():
    result = solve_opf(two_bus())
    assert nodal_price(result, 1) == nodal_price(result, 2) == pytest.approx(10.0)


def test_nodal_price_importing_exceeds_exporting():
    result = solve_opf(three_bus_congested())
    assert nodal_price(result, 3) > nodal_price(result, 1)


def test_nodal_price_single_bus():
    grid = PowerGridCase(
        buses=(Bus(1, 25.0, 0.9, 1.1, is_generator=True, gen_min=0.0, gen_max=100.0, gen_cost=42.0),),
        lines=(),
        slack_bus=1,
    )
    result = solve_opf(grid)
    assert nodal_price(result, 1) == pytest.approx(42.0)


def test_nodal_price_unknown_bus():
    result = solve_opf(two_bus())
    with pytest.raises(KeyError):
        nodal_price(result, 17)


def test_power_balance_and_duality_ieee14():
    grid = ieee14_case()
    charging = {4: 12.0, 9: 8.0, 13: 5.0}
    result = solve_opf(grid, charging)
    assert result.feasible
    served = sum(result.bus_load.values())
    assert result.total_generation() == pytest.approx(served, rel=1e-8)
    assert result.dual_cost == pytest.approx(result.cost, rel=1e-6)
    for bus_id, fraction in result.served_fraction.items():
        assert fraction == pytest.approx(1.0)


def test_generation_respects_bounds_and_line_limits():
    grid = three_bus_congested()
    result = solve_opf(grid, {3: 20.0})
    for bus in grid.buses:
        if bus.is_generator:
            g = result.generation[bus.id]
            assert bus.gen_min - 1e-6 <= g <= bus.gen_max + 1e-6
    for li, line in enumerate(grid.lines):
        assert abs(result.line_flow[li]) <= line.limit + 1e-6


def test_monotone_cost_in_charging_load():
    grid = ieee14_case()
    costs = []
    for mw in (0.0, 5.0, 15.0, 40.0):
        costs.append(solve_opf(grid, {9: mw}).cost)
    assert all(b >= a - 1e-9 for a, b in zip(costs, costs[1:]))


def test_proportional_shedding_when_overloaded():
    grid = PowerGridCase(
        buses=(
            Bus(1, 0.0, 0.9, 1.1, is_generator=True, gen_min=0.0, gen_max=50.0, gen_cost=10.0),
            Bus(2, 20.0, 0.9, 1.1),
            Bus(3, 0.0, 0.9, 1.1),
        ),
        lines=(Line(1, 2, 10.0, 500.0), Line(2, 3, 10.0, 500.0)),
        slack_bus=1,
    )
    # 20 base + 60 requested charging > 50 capacity: 30 MW can be served
    result = solve_opf(grid, {2: 30.0, 3: 30.0})
    assert result.feasible
    assert result.served_fraction[2] == pytest.approx(0.5, abs=1e-6)
    assert result.served_fraction[3] == pytest.approx(0.5, abs=1e-6)
    assert result.total_generation() == pytest.approx(50.0, abs=1e-6)
    assert result.total_shed() == pytest.approx(30.0, abs=1e-6)
    # base load is never shed
    assert result.bus_load[2] == pytest.approx(20.0 + 15.0, abs=1e-6)


def test_served_fraction_one_when_feasible():
    result = solve_opf(ieee14_case(), {9: 3.0})
    assert result.served_fraction == {9: pytest.approx(1.0)}


def test_islanded_load_is_structural_error():
    grid = PowerGridCase(
        buses=(
            Bus(1, 0.0, 0.9, 1.1, is_generator=True, gen_min=0.0, gen_max=100.0, gen_cost=10.0),
            Bus(2, 10.0, 0.9, 1.1),
        ),
        lines=(),
        slack_bus=1,
    )
    with pytest.raises(StructurallyInfeasibleError):
        solve_opf(grid)


def test_infeasible_base_load_reported_not_raised():
    grid = PowerGridCase(
        buses=(
            Bus(1, 0.0, 0.9, 1.1, is_generator=True, gen_min=0.0, gen_max=5.0, gen_cost=10.0),
            Bus(2, 30.0, 0.9, 1.1),
        ),
        lines=(Line(1, 2, 10.0, 500.0),),
        slack_bus=1,
    )
    result = solve_opf(grid)
    assert not result.feasible


def test_negative_charging_load_rejected():
    with pytest.raises(ValueError):
        solve_opf(two_bus(), {2: -1.0})


def test_voltage_estimate_clamped_and_violation_recorded():
    grid = PowerGridCase(
        buses=(
            Bus(1, 0.0, 0.94, 1.06, is_generator=True, gen_min=0.0, gen_max=4000.0, gen_cost=10.0),
            Bus(2, 900.0, 0.94, 1.06),
        ),
        lines=(Line(1, 2, 2.0, 5000.0),),
        slack_bus=1,
    )
    result = solve_opf(grid, voltage_model=VoltageModel(drop_coefficient=0.001))
    # raw estimate: 1.06 - 0.001 * 0.5 * 900 = 0.61, clamped to 0.94
    assert result.bus_voltage[2] == pytest.approx(0.94)
    assert result.voltage_violation[2] == pytest.approx(0.94 - 0.61, abs=1e-9)
    assert result.bus_voltage[1] == pytest.approx(1.06)


def test_electrical_distance():
    grid = three_bus_congested()
    dist = electrical_distance(grid)
    assert dist[1] == 0.0
    assert dist[2] == pytest.approx(0.1)
    assert dist[3] == pytest.approx(0.1)


def test_voltage_decreases_with_distance_and_load():
    grid = ieee14_case()
    result = solve_opf(grid)
    assert result.bus_voltage[1] == pytest.approx(1.06)
    # bus 3 carries the largest load; its estimate must sit below bus 2's
    assert result.bus_voltage[3] < result.bus_voltage[2]

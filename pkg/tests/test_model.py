from __future__ import annotations

import pytest

from chargeplan.coupled import CoupledConfig, run_coupled
from chargeplan.model import (
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
    validate_scenario,
)
from scenario_gen import random_scenario


def minimal_scenario():
    road = RoadNetwork(
        nodes=(RoadNode(1, 0.0, 0.0), RoadNode(2, 0.0, 0.01)),
        links=(RoadLink(1, 1, 2, 5.0, 100.0, 1.2),),
    )
    od = ODMatrix(slices=("h08",), entries=(ODEntry(1, 2, "h08", 40.0),), ev_share=0.5)
    grid = PowerGridCase(
        buses=(
            Bus(1, 0.0, 0.94, 1.06, is_generator=True, gen_min=0.0, gen_max=100.0, gen_cost=10.0),
            Bus(2, 5.0, 0.94, 1.06),
        ),
        lines=(Line(1, 2, 10.0, 50.0),),
        slack_bus=1,
    )
    coupling = CouplingMap(node_to_bus={1: 1, 2: 2}, charge_propensity=0.1, energy_per_vehicle=10.0)
    return road, od, grid, coupling


def test_minimal_consistent_scenario_passes():
    road, od, grid, coupling = minimal_scenario()
    report = validate_scenario(road, od, [], grid, coupling)
    assert report.ok
    assert report.violations == ()


def test_station_on_missing_node_reports_unknown_node():
    road, od, grid, coupling = minimal_scenario()
    stations = [ChargingStation("S1", "ghost", 99, 4)]
    report = validate_scenario(road, od, stations, grid, coupling)
    assert report.codes() == ["unknown-node"]
    assert "99" in report.violations[0].message


def test_missing_coupling_node_reports_uncovered_node():
    road, od, grid, coupling = minimal_scenario()
    coupling = CouplingMap(node_to_bus={1: 1}, charge_propensity=0.1, energy_per_vehicle=10.0)
    report = validate_scenario(road, od, [], grid, coupling)
    assert report.codes() == ["uncovered-node"]
    assert report.violations[0].entity == "2"


@pytest.mark.parametrize(
    "mutate, code",
    [
        (lambda r, od, g, c: (r, od, g, CouplingMap(c.node_to_bus, 1.5, c.energy_per_vehicle)),
         "propensity-range"),
        (lambda r, od, g, c: (r, ODMatrix(od.slices, od.entries, 2.0), g, c),
         "ev-share-range"),
        (lambda r, od, g, c: (r, ODMatrix(od.slices, (ODEntry(1, 1, "h08", 5.0),), od.ev_share), g, c),
         "self-loop-od"),
    ],
)
def test_single_violation_cases(mutate, code):
    road, od, grid, coupling = minimal_scenario()
    road, od, grid, coupling = mutate(road, od, grid, coupling)
    report = validate_scenario(road, od, [], grid, coupling)
    assert code in report.codes()


def test_two_stations_one_node_flagged():
    road, od, grid, coupling = minimal_scenario()
    stations = [
        ChargingStation("S1", "a", 1, 4),
        ChargingStation("S2", "b", 1, 6),
    ]
    report = validate_scenario(road, od, stations, grid, coupling)
    assert "node-collision" in report.codes()


def test_duplicate_ids_flagged():
    road, od, grid, coupling = minimal_scenario()
    bad_road = RoadNetwork(
        nodes=road.nodes + (RoadNode(1, 0.0, 0.02),), links=road.links
    )
    report = validate_scenario(bad_road, od, [], grid, coupling)
    assert "duplicate-id" in report.codes()
    # coupling now under-covers nothing new; known-node checks still resolve


def test_validation_is_pure_and_idempotent():
    scenario = random_scenario(11)
    first = validate_scenario(
        scenario.road, scenario.od, list(scenario.stations), scenario.grid, scenario.coupling
    )
    second = validate_scenario(
        scenario.road, scenario.od, list(scenario.stations), scenario.grid, scenario.coupling
    )
    assert first == second


@pytest.mark.parametrize("seed", range(8))
def test_random_valid_scenarios_run_end_to_end(seed):
    """A scenario that passes validation must not trip structural errors."""
    scenario = random_scenario(seed, max_nodes=12)
    report = validate_scenario(
        scenario.road, scenario.od, list(scenario.stations), scenario.grid, scenario.coupling
    )
    assert report.ok, report.codes()
    state = run_coupled(
        scenario,
        scenario.stations,
        CoupledConfig(ue_tol=1e-3, ue_max_iter=100, service_radius=3.0),
    )
    assert len(state.slices) == len(scenario.od.slices)
    for s in state.slices:
        assert all(v >= 0 for v in s.link_volume.values())
        assert all(v >= 0 for v in s.node_demand.values())
        for sid, served in s.station_served.items():
            assert served <= s.station_assigned[sid] + 1e-9

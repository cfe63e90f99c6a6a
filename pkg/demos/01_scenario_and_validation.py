"""Load the bundled toy scenario and walk through what's in it.

A scenario directory holds five files: a TNTP road network (plus node
coordinates), an OD trip table, a station list, a bus/branch grid case and
a node-to-bus coupling map. `load_scenario` parses and snaps everything;
`validate_scenario` then checks every structural invariant.
"""

from pathlib import Path

from chargeplan import load_scenario, validate_scenario

DATA = Path(__file__).parent.parent / "src" / "chargeplan" / "data"

scenario = load_scenario(DATA / "toy")
print(f"road: {len(scenario.road.nodes)} intersections, {len(scenario.road.links)} directed links")
print(f"demand: {len(scenario.od.entries)} OD entries over slices {scenario.od.slices}")
print(f"stations: {[f'{s.id}@node{s.node} x{s.chargers}' for s in scenario.stations]}")
print(f"grid: {len(scenario.grid.buses)} buses, {len(scenario.grid.lines)} lines, slack {scenario.grid.slack_bus}")
print(f"coupling: rho={scenario.coupling.charge_propensity}, "
      f"{scenario.coupling.energy_per_vehicle} kWh/vehicle, ev_share={scenario.od.ev_share}")

report = validate_scenario(
    scenario.road, scenario.od, list(scenario.stations), scenario.grid, scenario.coupling
)
print(f"\nvalidation ok: {report.ok}")

# break something on purpose to see violation records
from chargeplan.model import CouplingMap

holey = CouplingMap(
    node_to_bus={k: v for k, v in scenario.coupling.node_to_bus.items() if k != 5},
    charge_propensity=scenario.coupling.charge_propensity,
    energy_per_vehicle=scenario.coupling.energy_per_vehicle,
)
broken = validate_scenario(
    scenario.road, scenario.od, list(scenario.stations), scenario.grid, holey
)
for v in broken.violations:
    print(f"violation: {v.code} on {v.entity}: {v.message}")

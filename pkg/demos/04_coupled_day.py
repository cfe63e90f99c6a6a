"""One full day through the coupled pipeline on the toy city.

Per slice: equilibrium traffic -> charging demand at intersections ->
nearest-station routing -> grid dispatch. The snapshot file at the end is
the exact artifact the CLI's `run` writes and the service serves.
"""

from pathlib import Path

from chargeplan import CoupledConfig, load_scenario, run_coupled, station_coverage
from chargeplan.coupled import write_snapshot

DATA = Path(__file__).parent.parent / "src" / "chargeplan" / "data"

scenario = load_scenario(DATA / "toy")
config = CoupledConfig(ue_tol=1e-5, service_radius=5.0)
state = run_coupled(scenario, scenario.stations, config)

print(f"{'slice':>6} {'demand kWh':>11} {'served kWh':>11} {'unserved':>9} {'price@bus1':>10}")
for s in state.slices:
    served = sum(s.station_served.values())
    print(f"{s.slice:>6} {s.total_demand():11.1f} {served:11.1f} "
          f"{s.unserved_demand():9.1f} {s.bus_price[1]:10.2f}")

print("\nper-station mean coverage of total demand:")
for st in scenario.stations:
    print(f"  {st.id} ({st.name}, {st.chargers} chargers): "
          f"{station_coverage(state, st.id):.3f}")

snapshot = write_snapshot(state)
print(f"\nsnapshot is {len(snapshot.splitlines())} lines; first five:")
for line in snapshot.splitlines()[:5]:
    print(f"  {line}")

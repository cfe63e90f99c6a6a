"""Search for two new stations, then quantify what they change.

The GA scores candidates against the baseline (captured demand, service
time, investment, weighted); the top three distinct plans then get a full
coupled re-solve, and the impact report diffs roads and buses per slice.
"""

from pathlib import Path

from chargeplan import CoupledConfig, GaConfig, diff_states, load_scenario, run_coupled, run_siting

DATA = Path(__file__).parent.parent / "src" / "chargeplan" / "data"

scenario = load_scenario(DATA / "toy")
coupled = CoupledConfig(ue_tol=1e-4)
baseline = run_coupled(scenario, scenario.stations, coupled)

config = GaConfig(
    new_station_count=2,
    charger_min=6,
    charger_max=20,
    children_per_iteration=16,
    iterations=25,
    seed=7,
    w_coverage=1.0, w_service=1.0, w_investment=1.0,
)
results = run_siting(scenario, config, coupled, baseline=baseline)

for rank, (sol, deployed) in enumerate(results, start=1):
    print(f"plan {rank}: f0={sol.objective:.4f}")
    for node, chargers in sol.placements:
        print(f"  node {node} with {chargers} chargers")
    b = sol.breakdown
    print(f"  coverage {b.coverage:.3f}, service {b.service_time:.1f} h, "
          f"investment {b.investment:.2f}")
    report = diff_states(baseline, deployed)
    worst = max(report.slices, key=lambda s: s.affected_road_count)
    print(f"  impact: up to {worst.affected_road_count} roads and "
          f"{worst.affected_bus_count} buses past 1% in slice {worst.slice}\n")

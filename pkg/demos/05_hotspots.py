"""Traffic hotspots: volume-weighted communities, linked across hours.

The road graph is clustered per slice with Louvain on summed directional
volumes; communities rank by average internal volume. Adjacent slices
link when their node sets overlap (Jaccard similarity), which is what the
timeline overview draws as flow bands.
"""

from pathlib import Path

from chargeplan import CoupledConfig, build_timeline, load_scenario, run_coupled

DATA = Path(__file__).parent.parent / "src" / "chargeplan" / "data"

scenario = load_scenario(DATA / "toy")
state = run_coupled(scenario, scenario.stations, CoupledConfig(ue_tol=1e-5))
timeline = build_timeline(state, scenario.road, scenario.stations, k=3)

for h in timeline.hotspots:
    gap = h.demand_share - h.served_share
    note = "DEMAND GAP" if gap > 0.01 else ""
    print(f"{h.id}: rank {h.rank}, {h.area_size} nodes {sorted(h.nodes)}, "
          f"avg volume {h.avg_volume:.0f}, demand {h.demand_share:.2f} vs "
          f"served {h.served_share:.2f} {note}")

print("\nlinks between adjacent slices:")
for link in timeline.links:
    print(f"  {link.from_id} -> {link.to_id}: similarity {link.similarity:.2f}")

"""User-equilibrium assignment on the 24-node benchmark.

Frank-Wolfe alternates all-or-nothing loadings with an exact line search;
the relative gap measures how far drivers are from their best responses.
Watch the gap fall, then look at the busiest roads.
"""

from pathlib import Path

from chargeplan import load_scenario, solve_ue

DATA = Path(__file__).parent.parent / "src" / "chargeplan" / "data"

scenario = load_scenario(DATA / "benchmark24")
od = scenario.od.for_slice("h08")
print(f"{len(od)} OD pairs, {sum(e.trips for e in od):.0f} trips total")

result = solve_ue(scenario.road, od, tol=1e-6, max_iter=500)
print(f"converged to gap {result.relative_gap:.2e} in {result.iterations} iterations")
for i in (0, 1, 2, 4, 9, 49, len(result.gap_history) - 1):
    if i < len(result.gap_history):
        print(f"  iteration {i + 1:3d}: gap {result.gap_history[i]:.3e}")

by_id = scenario.road.link_by_id()
busiest = sorted(result.link_volume.items(), key=lambda kv: -kv[1])[:8]
print("\nbusiest links (volume / capacity):")
for lid, volume in busiest:
    link = by_id[lid]
    print(f"  {link.from_node:>2} -> {link.to_node:<2}  {volume:8.1f} / {link.capacity:.0f}"
          f"  ({volume / link.capacity:.2f})")

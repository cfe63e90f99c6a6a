"""Least-cost dispatch on the 14-bus system as charging load grows.

The DC model keeps everything linear: bus prices are the duals of the
balance constraints, so they jump only when a limit starts binding. The
voltage figure is the post-hoc linear drop estimate, not an AC solution.
"""

from chargeplan import solve_opf
from chargeplan.synth import ieee14_case

grid = ieee14_case()

print("charging at bus 9, sweeping MW:")
print(f"{'MW':>6} {'cost $':>10} {'price@9':>8} {'volt@9':>7} {'served':>7}")
for mw in (0.0, 10.0, 30.0, 60.0, 120.0):
    result = solve_opf(grid, {9: mw})
    served = result.served_fraction.get(9, 1.0)
    print(f"{mw:6.0f} {result.cost:10.1f} {result.bus_price[9]:8.2f} "
          f"{result.bus_voltage[9]:7.4f} {served:7.2f}")

# squeeze a line until prices separate
from chargeplan.model import Bus, Line, PowerGridCase

grid3 = PowerGridCase(
    buses=(
        Bus(1, 0.0, 0.9, 1.1, is_generator=True, gen_min=0.0, gen_max=200.0, gen_cost=10.0),
        Bus(2, 0.0, 0.9, 1.1, is_generator=True, gen_min=0.0, gen_max=200.0, gen_cost=30.0),
        Bus(3, 90.0, 0.9, 1.1),
    ),
    lines=(Line(1, 2, 10.0, 500.0), Line(1, 3, 10.0, 40.0), Line(2, 3, 10.0, 500.0)),
    slack_bus=1,
)
result = solve_opf(grid3)
print("\n3-bus case with a tight 1->3 line:")
print(f"  generation: {result.generation}")
print(f"  line flows: { {i: round(f, 1) for i, f in result.line_flow.items()} }")
print(f"  prices:     { {b: round(p, 2) for b, p in result.bus_price.items()} }")
print("  the load bus pays more than the cheap generator's cost: congestion rent")

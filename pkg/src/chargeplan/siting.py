"""Genetic search for new charging-station sites.

Fitness comes from the baseline coupled state only (demand captured,
per-site service time, investment); the expensive post-deployment re-solve
runs just for the returned top three, mirroring the two-pass pipeline.

Determinism: every stochastic step of generation g, child i draws from its
own PCG64 stream spawned from (seed, g, i), so the outcome is a pure
function of scenario + config + seed no matter how fitness evaluation is
scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .coupled import (
    CoupledConfig,
    road_distances_to_station,
    run_coupled,
    with_extra_stations,
)
from .ingest import Scenario
from .model import ChargingStation, RoadNetwork, TimeSlicedState

Placement = tuple[int, int]  # (road node, charger count)


class InsufficientCandidatesError(ValueError):
    pass


class PlacementOnStationError(ValueError):
    pass


@dataclass(frozen=True)
class GaConfig:
    children_per_iteration: int = 24
    iterations: int = 40
    new_station_count: int = 2
    charger_min: int = 6
    charger_max: int = 20
    w_coverage: float = 1.0
    w_service: float = 1.0
    w_investment: float = 1.0
    seed: int = 0
    elite: int = 2
    mutation_rate: float = 0.3
    fixed_cost: float = 1.0    # per station, normalized money
    unit_cost: float = 0.1     # per charger

    def __post_init__(self):
        if self.children_per_iteration < 1 or self.iterations < 1:
            raise ValueError("children_per_iteration and iterations must be >= 1")
        if self.new_station_count < 1:
            raise ValueError("new_station_count must be >= 1")
        if self.charger_min < 1 or self.charger_min > self.charger_max:
            raise ValueError(
                f"charger range [{self.charger_min}, {self.charger_max}] is invalid"
            )
        for w in (self.w_coverage, self.w_service, self.w_investment):
            if w < 0:
                raise ValueError(f"weights must be >= 0, got {w}")
        if self.w_coverage == self.w_service == self.w_investment == 0:
            raise ValueError("at least one weight must be positive")
        if self.elite < 0:
            raise ValueError("elite must be >= 0")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")


@dataclass(frozen=True)
class ObjectiveBreakdown:
    coverage: float        # share of total demand newly captured, [0, 1]
    service_time: float    # sum over placements of demand/chargers, hours
    investment: float      # fixed + per-charger cost over placements


@dataclass(frozen=True)
class SitingSolution:
    placements: tuple[Placement, ...]
    objective: float
    breakdown: ObjectiveBreakdown

    def nodes(self) -> frozenset[int]:
        return frozenset(n for n, _ in self.placements)


@dataclass
class SitingProblem:
    """Baseline facts the objective needs, precomputed once per GA run."""

    road: RoadNetwork
    stations: tuple[ChargingStation, ...]
    candidates: tuple[int, ...]          # nodes without a station, ascending
    node_demand: dict[int, float]        # kWh summed over slices
    total_demand: float
    baseline_distance: dict[int, float]  # node -> km to its current server
    service_radius: float
    _dist_cache: dict[int, dict[int, float]] = field(default_factory=dict)

    @classmethod
    def from_baseline(
        cls,
        scenario: Scenario,
        stations: tuple[ChargingStation, ...] | list[ChargingStation],
        baseline: TimeSlicedState,
        config: CoupledConfig,
    ) -> "SitingProblem":
        demand: dict[int, float] = {n.id: 0.0 for n in scenario.road.nodes}
        for s in baseline.slices:
            for nid, kwh in s.node_demand.items():
                demand[nid] += kwh
        occupied = {st.node for st in stations}
        baseline_distance = {n.id: math.inf for n in scenario.road.nodes}
        for st in stations:
            dist = road_distances_to_station(scenario.road, st.node)
            for nid, d in dist.items():
                if d <= config.service_radius and d < baseline_distance[nid]:
                    baseline_distance[nid] = d
        return cls(
            road=scenario.road,
            stations=tuple(stations),
            candidates=tuple(
                n.id for n in scenario.road.nodes if n.id not in occupied
            ),
            node_demand=demand,
            total_demand=sum(demand.values()),
            baseline_distance=baseline_distance,
            service_radius=config.service_radius,
        )

    def distances_to(self, node: int) -> dict[int, float]:
        got = self._dist_cache.get(node)
        if got is None:
            got = road_distances_to_station(self.road, node)
            self._dist_cache[node] = got
        return got


def score(
    problem: SitingProblem,
    placements: tuple[Placement, ...] | list[Placement],
    config: GaConfig,
) -> tuple[float, ObjectiveBreakdown]:
    """Weighted objective, minimized: -w1*coverage + w2*service + w3*invest.

    Coverage counts demand that was unserved or strictly closer to a new
    site than to its current server, so already-served demand is not
    double-counted. Service and investment are normalized by a fixed
    reference (the station-count highest-demand candidates built out at
    charger_max) to make the three weights comparable.
    """
    occupied = {st.node for st in problem.stations}
    for node, chargers in placements:
        if node in occupied:
            raise PlacementOnStationError(f"node {node} already hosts a station")
        if not config.charger_min <= chargers <= config.charger_max:
            raise ValueError(f"chargers {chargers} outside configured range")

    captured = 0.0
    for nid, demand in problem.node_demand.items():
        if demand <= 0.0:
            continue
        new_d = math.inf
        for node, _ in placements:
            d = problem.distances_to(node).get(nid, math.inf)
            if d < new_d:
                new_d = d
        if new_d > problem.service_radius:
            continue
        if new_d < problem.baseline_distance[nid]:  # inf when unserved
            captured += demand
    coverage = captured / problem.total_demand if problem.total_demand > 0 else 0.0

    service = sum(problem.node_demand.get(n, 0.0) / x for n, x in placements)
    investment = sum(config.fixed_cost + config.unit_cost * x for _, x in placements)
    ref_service, ref_invest = _reference_terms(problem, config)
    objective = (
        -config.w_coverage * coverage
        + config.w_service * (service / ref_service)
        + config.w_investment * (investment / ref_invest)
    )
    return objective, ObjectiveBreakdown(coverage, service, investment)


def _reference_terms(problem: SitingProblem, config: GaConfig) -> tuple[float, float]:
    k = config.new_station_count
    top = sorted(
        problem.candidates, key=lambda n: (-problem.node_demand.get(n, 0.0), n)
    )[:k]
    ref_service = sum(problem.node_demand.get(n, 0.0) for n in top) / config.charger_max
    ref_invest = k * (config.fixed_cost + config.unit_cost * config.charger_max)
    return (ref_service if ref_service > 0 else 1.0), ref_invest


# ---------------------------------------------------------------------------
# The genetic algorithm
# ---------------------------------------------------------------------------

def _stream(seed: int, generation: int, child: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(generation, child)))
    )


def _canonical(placements: list[Placement]) -> tuple[Placement, ...]:
    return tuple(sorted(placements))


def _random_individual(
    rng: np.random.Generator, candidates: tuple[int, ...], config: GaConfig
) -> tuple[Placement, ...]:
    nodes = rng.choice(len(candidates), size=config.new_station_count, replace=False)
    chargers = rng.integers(
        config.charger_min, config.charger_max + 1, size=config.new_station_count
    )
    return _canonical(
        [(candidates[int(i)], int(x)) for i, x in zip(nodes, chargers)]
    )


def _tournament(rng: np.random.Generator, fitness: list[float]) -> int:
    a, b = int(rng.integers(len(fitness))), int(rng.integers(len(fitness)))
    if fitness[a] == fitness[b]:
        return min(a, b)
    return a if fitness[a] < fitness[b] else b


def _crossover(
    rng: np.random.Generator,
    pa: tuple[Placement, ...],
    pb: tuple[Placement, ...],
    candidates: tuple[int, ...],
    config: GaConfig,
) -> list[Placement]:
    child: list[Placement] = []
    used: set[int] = set()
    for slot_a, slot_b in zip(pa, pb):
        pick = slot_a if rng.random() < 0.5 else slot_b
        if pick[0] in used:
            pick = slot_b if pick is slot_a else slot_a
        if pick[0] in used:
            pick = _repair(rng, used, candidates, config)
        child.append(pick)
        used.add(pick[0])
    return child


def _repair(
    rng: np.random.Generator,
    used: set[int],
    candidates: tuple[int, ...],
    config: GaConfig,
) -> Placement:
    free = [c for c in candidates if c not in used]
    node = free[int(rng.integers(len(free)))]
    x = int(rng.integers(config.charger_min, config.charger_max + 1))
    return (node, x)


def _mutate(
    rng: np.random.Generator,
    placements: list[Placement],
    candidates: tuple[int, ...],
    config: GaConfig,
) -> list[Placement]:
    if rng.random() >= config.mutation_rate:
        return placements
    idx = int(rng.integers(len(placements)))
    used = {n for n, _ in placements}
    if rng.random() < 0.5 and len(candidates) > len(placements):
        used.discard(placements[idx][0])
        placements[idx] = _repair(rng, used, candidates, config)
    else:
        node, x = placements[idx]
        step = 1 if rng.random() < 0.5 else -1
        placements[idx] = (
            node,
            min(max(x + step, config.charger_min), config.charger_max),
        )
    return placements


def evolve(
    problem: SitingProblem,
    config: GaConfig,
    on_generation: "Callable[[int, int, float], None] | None" = None,
) -> list[SitingSolution]:
    """Run the GA and return up to three best solutions with distinct sites.

    on_generation(done, total, best_objective) fires after every generation;
    it exists for progress and trace reporting and must not touch GA state.
    """
    if len(problem.candidates) < config.new_station_count:
        raise InsufficientCandidatesError(
            f"{len(problem.candidates)} candidate nodes for "
            f"{config.new_station_count} new stations"
        )

    archive: dict[frozenset[int], tuple[float, tuple[Placement, ...], ObjectiveBreakdown]] = {}

    def evaluate(ind: tuple[Placement, ...]) -> float:
        f0, breakdown = score(problem, ind, config)
        key = frozenset(n for n, _ in ind)
        best = archive.get(key)
        if best is None or (f0, ind) < (best[0], best[1]):
            archive[key] = (f0, ind, breakdown)
        return f0

    population = [
        _random_individual(_stream(config.seed, 0, i), problem.candidates, config)
        for i in range(config.children_per_iteration)
    ]
    fitness = [evaluate(ind) for ind in population]

    for gen in range(1, config.iterations + 1):
        n_children = max(config.children_per_iteration - config.elite, 1)
        children = []
        for i in range(n_children):
            rng = _stream(config.seed, gen, i)
            pa = population[_tournament(rng, fitness)]
            pb = population[_tournament(rng, fitness)]
            child = _crossover(rng, pa, pb, problem.candidates, config)
            child = _mutate(rng, child, problem.candidates, config)
            children.append(_canonical(child))
        child_fit = [evaluate(c) for c in children]

        ranked = sorted(zip(fitness, population), key=lambda p: (p[0], p[1]))
        elites = ranked[: config.elite]
        ranked_children = sorted(zip(child_fit, children), key=lambda p: (p[0], p[1]))
        merged = elites + ranked_children
        merged = merged[: config.children_per_iteration]
        fitness = [f for f, _ in merged]
        population = [ind for _, ind in merged]
        if on_generation is not None:
            on_generation(gen, config.iterations, min(f for f, _, _ in archive.values()))

    best = sorted(archive.values(), key=lambda item: (item[0], item[1]))
    return [
        SitingSolution(placements=ind, objective=f0, breakdown=breakdown)
        for f0, ind, breakdown in best[:3]
    ]


def run_siting(
    scenario: Scenario,
    ga_config: GaConfig,
    coupled_config: CoupledConfig = CoupledConfig(),
    baseline: TimeSlicedState | None = None,
    on_progress: "Callable[[float], None] | None" = None,
) -> list[tuple[SitingSolution, TimeSlicedState]]:
    """Evolve on the baseline, then re-run the coupled model per solution."""
    stations = tuple(scenario.stations)
    if baseline is None:
        baseline = run_coupled(scenario, stations, coupled_config)
    problem = SitingProblem.from_baseline(scenario, stations, baseline, coupled_config)

    def ga_progress(done: int, total: int, _best: float) -> None:
        if on_progress is not None:
            on_progress(0.5 * done / total)

    solutions = evolve(problem, ga_config, on_generation=ga_progress)
    out: list[tuple[SitingSolution, TimeSlicedState]] = []
    for rank, sol in enumerate(solutions, start=1):
        extra = [
            ChargingStation(
                id=f"new-{rank}-{idx}",
                name=f"proposed {rank}.{idx}",
                node=node,
                chargers=x,
                is_existing=False,
            )
            for idx, (node, x) in enumerate(sol.placements, start=1)
        ]
        deployed_scenario, merged = with_extra_stations(scenario, extra)
        state = run_coupled(deployed_scenario, merged, coupled_config)
        out.append((sol, state))
        if on_progress is not None:
            on_progress(0.5 + 0.5 * rank / max(len(solutions), 1))
    return out

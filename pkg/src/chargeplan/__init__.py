"""Siting engine for EV charging stations over coupled road and power networks.

The pipeline: parse a scenario, solve user-equilibrium traffic per time
slice, accrue charging demand at intersections, route it to stations,
run a linear OPF for grid load/voltage/prices, detect traffic hotspots,
search for new sites with a genetic algorithm, and quantify the
post-deployment impact. A CLI (`chargeplan`) and an HTTP service expose
the same operations for scripts and the planner UI.
"""

from .assignment import (
    AssignmentResult,
    DisconnectedODError,
    LinkCostModel,
    accrue_demand,
    solve_ue,
    station_attribution,
)
from .coupled import (
    CoupledConfig,
    DemandAssignment,
    assign_demand,
    read_snapshot,
    run_coupled,
    station_coverage,
    write_snapshot,
)
from .hotspots import (
    Hotspot,
    HotspotLink,
    HotspotTimeline,
    build_timeline,
    detect_hotspots,
    link_hotspots,
    louvain,
    modularity,
)
from .impact import (
    ImpactReport,
    TopologyMismatchError,
    diff_states,
    filter_impact,
    read_impact,
    write_impact,
)
from .ingest import (
    ParseError,
    Scenario,
    ScenarioBundle,
    load_scenario,
    parse_grid_case,
    parse_od,
    parse_road_network,
    parse_stations,
    write_scenario,
)
from .model import (
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
    SliceState,
    TimeSlicedState,
    ValidationReport,
    validate_scenario,
)
from .powerflow import (
    OpfResult,
    StructurallyInfeasibleError,
    VoltageModel,
    nodal_price,
    solve_opf,
)
from .siting import (
    GaConfig,
    InsufficientCandidatesError,
    ObjectiveBreakdown,
    SitingProblem,
    SitingSolution,
    evolve,
    run_siting,
    score,
)

__version__ = "0.1.0"

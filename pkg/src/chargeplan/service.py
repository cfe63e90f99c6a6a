"""HTTP/JSON service behind the planner UI.

Synchronous reads serve the precomputed baseline state; siting runs are
asynchronous jobs on a single worker thread (one heavy solve at a time).
Results persist on disk keyed by a content hash of scenario + request, so
resubmitting an identical request replays instantly and byte-identically.
"""

from __future__ import annotations

import hashlib
import json
import queue
import threading
import time
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field, model_validator

from .assignment import station_attribution
from .coupled import CoupledConfig, run_coupled, write_snapshot
from .hotspots import build_timeline
from .impact import diff_states, filter_impact, write_impact
from .ingest import Scenario, load_scenario, write_grid_case, write_od, write_road_network, write_stations
from .model import validate_scenario
from .serialize import (
    impact_to_dict,
    scenario_summary,
    slice_to_dict,
    solution_to_dict,
    station_series,
    stations_table,
    timeline_to_dict,
    validation_to_dict,
)
from .siting import GaConfig, run_siting

API_PREFIX = "/api/v1"


class Weights(BaseModel):
    w1: float = Field(ge=0, description="charging demand coverage weight")
    w2: float = Field(ge=0, description="service time weight")
    w3: float = Field(ge=0, description="investment weight")

    @model_validator(mode="after")
    def _not_all_zero(self):
        if self.w1 == self.w2 == self.w3 == 0:
            raise ValueError("at least one weight must be positive")
        return self


class SitingRequest(BaseModel):
    """Body of POST /siting; field names mirror the control panel."""

    weights: Weights
    stations: int = Field(ge=1, description="number of new charging stations")
    chargers: tuple[int, int] = Field(description="charger count range [lo, hi]")
    children: int = Field(default=24, ge=1)
    iterations: int = Field(default=40, ge=1)
    seed: int = 0
    elite: int = Field(default=2, ge=0)
    mutation_rate: float = Field(default=0.3, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _charger_range(self):
        lo, hi = self.chargers
        if lo < 1 or lo > hi:
            raise ValueError(f"charger range [{lo}, {hi}] is invalid")
        return self

    def to_ga_config(self) -> GaConfig:
        return GaConfig(
            children_per_iteration=self.children,
            iterations=self.iterations,
            new_station_count=self.stations,
            charger_min=self.chargers[0],
            charger_max=self.chargers[1],
            w_coverage=self.weights.w1,
            w_service=self.weights.w2,
            w_investment=self.weights.w3,
            seed=self.seed,
            elite=self.elite,
            mutation_rate=self.mutation_rate,
        )


class JobHandle(BaseModel):
    id: str
    kind: Literal["coupled-run", "siting-run"]
    status: Literal["queued", "running", "done", "failed"]
    progress: float = 0.0
    result: str | None = None  # locator under /api/v1 once done
    error: str | None = None


_STATUS_ORDER = {"queued": 0, "running": 1, "done": 2, "failed": 2}


class JobStore:
    """Thread-safe job registry with forward-only status transitions."""

    def __init__(self):
        self._jobs: dict[str, JobHandle] = {}
        self._lock = threading.Lock()

    def put(self, job: JobHandle) -> None:
        with self._lock:
            self._jobs[job.id] = job

    def get(self, job_id: str) -> JobHandle | None:
        with self._lock:
            job = self._jobs.get(job_id)
            return job.model_copy() if job else None

    def update(self, job_id: str, **changes) -> None:
        with self._lock:
            job = self._jobs[job_id]
            status = changes.get("status")
            if status and _STATUS_ORDER[status] < _STATUS_ORDER[job.status]:
                raise ValueError(f"job {job_id}: {job.status} -> {status} goes backward")
            self._jobs[job_id] = job.model_copy(update=changes)


def scenario_digest(scenario: Scenario) -> str:
    """Content hash of the scenario as serialized (station order included)."""
    net, nodes = write_road_network(scenario.road)
    blob = "\x1e".join(
        [
            net,
            nodes,
            write_od(scenario.od),
            write_stations(list(scenario.stations), scenario.road),
            write_grid_case(scenario.grid),
            repr(scenario.coupling.charge_propensity),
            repr(scenario.coupling.energy_per_vehicle),
            json.dumps(sorted(scenario.coupling.node_to_bus.items())),
        ]
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class PlannerService:
    """Owns the scenario, the baseline state, caches and the job worker."""

    def __init__(
        self,
        scenario: Scenario,
        results_dir: str | Path,
        config: CoupledConfig | None = None,
        hotspot_count: int = 5,
        workers: int = 1,
    ):
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        report = validate_scenario(
            scenario.road, scenario.od, list(scenario.stations), scenario.grid,
            scenario.coupling,
        )
        if not report.ok:
            raise ValueError(f"scenario fails validation: {report.codes()}")
        self.scenario = scenario
        self.config = config or CoupledConfig(retain_paths=True)
        self.hotspot_count = hotspot_count
        self.results_dir = Path(results_dir)
        self.results_dir.mkdir(parents=True, exist_ok=True)
        self.jobs = JobStore()
        self._digest = scenario_digest(scenario)

        baseline_id = self._job_id("baseline", {"config": "default"})
        self.jobs.put(JobHandle(id=baseline_id, kind="coupled-run", status="running"))
        self.baseline = self._cached_baseline()
        self.timeline = build_timeline(
            self.baseline, scenario.road, scenario.stations, hotspot_count
        )
        self.jobs.update(
            baseline_id, status="done", progress=1.0, result=f"{API_PREFIX}/state"
        )

        self._queue: queue.Queue[str | None] = queue.Queue()
        self._pending: dict[str, SitingRequest] = {}
        self._siting_results: dict[str, dict] = {}
        self._latest_siting: str | None = None
        self._assignment_cache: dict[str, object] = {}
        self._lock = threading.Lock()
        self._workers = [
            threading.Thread(target=self._work, daemon=True) for _ in range(workers)
        ]
        for worker in self._workers:
            worker.start()

    # -- helpers -----------------------------------------------------------

    def _job_id(self, kind: str, payload: dict) -> str:
        from .coupled import SNAPSHOT_VERSION

        blob = json.dumps(
            {
                "scenario": self._digest,
                "kind": kind,
                "req": payload,
                "schema": SNAPSHOT_VERSION,
            },
            sort_keys=True,
        )
        return f"{kind}-{hashlib.sha256(blob.encode()).hexdigest()[:16]}"

    def _cached_baseline(self):
        from .coupled import SNAPSHOT_VERSION, read_snapshot

        cache = self.results_dir / f"baseline-v{SNAPSHOT_VERSION}-{self._digest[:16]}.snapshot"
        if cache.exists():
            return read_snapshot(cache.read_text(encoding="utf-8"))
        state = run_coupled(self.scenario, self.scenario.stations, self.config)
        cache.write_text(write_snapshot(state), encoding="utf-8")
        return state

    # -- siting jobs ---------------------------------------------------------

    def submit_siting(self, request: SitingRequest) -> JobHandle:
        job_id = self._job_id("siting", request.model_dump(mode="json"))
        existing = self.jobs.get(job_id)
        if existing is not None:
            return existing
        stored = self.results_dir / job_id
        if (stored / "solutions.json").exists():
            self._install_result(job_id, json.loads((stored / "solutions.json").read_text()))
            handle = JobHandle(
                id=job_id, kind="siting-run", status="done", progress=1.0,
                result=f"{API_PREFIX}/solutions",
            )
            self.jobs.put(handle)
            return handle
        handle = JobHandle(id=job_id, kind="siting-run", status="queued")
        self.jobs.put(handle)
        with self._lock:
            self._pending[job_id] = request
        self._queue.put(job_id)
        return handle

    def _work(self) -> None:
        while True:
            job_id = self._queue.get()
            if job_id is None:
                return
            with self._lock:
                request = self._pending.pop(job_id)
            self.jobs.update(job_id, status="running")
            try:
                payload = self._run_siting(job_id, request)
                self._install_result(job_id, payload)
                self.jobs.update(
                    job_id, status="done", progress=1.0,
                    result=f"{API_PREFIX}/solutions",
                )
            except Exception as exc:  # job errors surface via the handle
                self.jobs.update(job_id, status="failed", error=str(exc))

    def _run_siting(self, job_id: str, request: SitingRequest) -> dict:
        def on_progress(fraction: float) -> None:
            self.jobs.update(job_id, progress=round(fraction, 4))
            time.sleep(0.001)  # yield so status polls stay snappy

        results = run_siting(
            self.scenario,
            request.to_ga_config(),
            self.config,
            baseline=self.baseline,
            on_progress=on_progress,
        )
        out_dir = self.results_dir / job_id
        out_dir.mkdir(parents=True, exist_ok=True)
        payload = {"job": job_id, "solutions": []}
        for rank, (sol, state) in enumerate(results, start=1):
            sid = f"plan-{rank}"
            report = diff_states(self.baseline, state)
            (out_dir / f"{sid}.snapshot").write_text(
                write_snapshot(state), encoding="utf-8"
            )
            (out_dir / f"{sid}.impact").write_text(write_impact(report), encoding="utf-8")
            entry = {"id": sid, **solution_to_dict(sol)}
            entry["impact"] = impact_to_dict(report)
            payload["solutions"].append(entry)
        (out_dir / "solutions.json").write_text(
            json.dumps(payload, sort_keys=True), encoding="utf-8"
        )
        return payload

    def _install_result(self, job_id: str, payload: dict) -> None:
        with self._lock:
            self._siting_results[job_id] = payload
            self._latest_siting = job_id

    def latest_solutions(self) -> dict | None:
        with self._lock:
            if self._latest_siting is None:
                return None
            return self._siting_results[self._latest_siting]

    def slice_assignment(self, label: str):
        """Equilibrium with retained paths for attribution, cached per slice."""
        from .assignment import solve_ue

        got = self._assignment_cache.get(label)
        if got is None:
            got = solve_ue(
                self.scenario.road,
                self.scenario.od.for_slice(label),
                cost=self.config.cost,
                tol=self.config.ue_tol,
                max_iter=self.config.ue_max_iter,
                retain_paths=True,
            )
            self._assignment_cache[label] = got
        return got

    def shutdown(self) -> None:
        for _ in self._workers:
            self._queue.put(None)


def create_app(
    scenario_dir: str | Path,
    results_dir: str | Path | None = None,
    config: CoupledConfig | None = None,
    hotspot_count: int = 5,
    ui_dist: str | Path | None = None,
    workers: int = 1,
) -> FastAPI:
    scenario = load_scenario(scenario_dir)
    # default cache lives under the working directory, never in the
    # (possibly read-only, possibly packaged) scenario directory
    results = Path(results_dir) if results_dir else Path.cwd() / ".chargeplan-results"
    svc = PlannerService(scenario, results, config, hotspot_count, workers)
    app = FastAPI(title="chargeplan", version="1")
    app.state.service = svc

    by_label = svc.baseline.by_label()
    station_ids = {st.id for st in scenario.stations}

    @app.get(f"{API_PREFIX}/scenario")
    def get_scenario():
        summary = scenario_summary(scenario)
        summary["validation"] = validation_to_dict(
            validate_scenario(
                scenario.road, scenario.od, list(scenario.stations), scenario.grid,
                scenario.coupling,
            )
        )
        return summary

    @app.get(f"{API_PREFIX}/state/{{slice_label}}")
    def get_state(slice_label: str):
        state = by_label.get(slice_label)
        if state is None:
            raise HTTPException(404, detail={"error": "unknown-slice"})
        return slice_to_dict(state)

    @app.get(f"{API_PREFIX}/hotspots")
    def get_hotspots(layout: str = "rank"):
        if layout not in ("rank", "link", "volume"):
            raise HTTPException(422, detail={"error": "unknown-layout"})
        payload = timeline_to_dict(svc.timeline)
        payload["layout"] = layout
        return payload

    @app.get(f"{API_PREFIX}/stations")
    def get_stations():
        return stations_table(scenario, svc.baseline)

    @app.get(f"{API_PREFIX}/stations/{{station_id}}/series")
    def get_station_series(station_id: str):
        if station_id not in station_ids:
            raise HTTPException(404, detail={"error": "unknown-station"})
        return station_series(svc.baseline, station_id)

    @app.get(f"{API_PREFIX}/stations/{{station_id}}/attribution")
    def get_attribution(station_id: str):
        if station_id not in station_ids:
            raise HTTPException(404, detail={"error": "unknown-station"})
        station = next(st for st in scenario.stations if st.id == station_id)
        slices = []
        for label in svc.baseline.labels():
            result = svc.slice_assignment(label)
            volumes = station_attribution(
                result, scenario.road, station.node, scenario.coupling,
                scenario.od.ev_share,
            )
            slices.append(
                {
                    "slice": label,
                    "attributable": {str(k): v for k, v in sorted(volumes.items())},
                }
            )
        return {"station": station_id, "node": station.node, "slices": slices}

    @app.post(f"{API_PREFIX}/siting", status_code=202)
    def post_siting(request: SitingRequest):
        return svc.submit_siting(request)

    @app.get(f"{API_PREFIX}/jobs/{{job_id}}")
    def get_job(job_id: str):
        job = svc.jobs.get(job_id)
        if job is None:
            return JSONResponse(status_code=404, content={"error": "unknown-job"})
        return job

    @app.get(f"{API_PREFIX}/solutions")
    def get_solutions():
        payload = svc.latest_solutions()
        if payload is None:
            return {"job": None, "solutions": []}
        return {
            "job": payload["job"],
            "solutions": [
                {k: v for k, v in entry.items() if k != "impact"}
                for entry in payload["solutions"]
            ],
        }

    @app.get(f"{API_PREFIX}/solutions/{{solution_id}}/impact")
    def get_solution_impact(
        solution_id: str,
        road_lo: float = float("-inf"),
        road_hi: float = float("inf"),
        bus_lo: float = float("-inf"),
        bus_hi: float = float("inf"),
    ):
        payload = svc.latest_solutions()
        if payload is None:
            raise HTTPException(404, detail={"error": "unknown-solution"})
        entry = next(
            (e for e in payload["solutions"] if e["id"] == solution_id), None
        )
        if entry is None:
            raise HTTPException(404, detail={"error": "unknown-solution"})
        from .serialize import impact_from_dict

        report = impact_from_dict(entry["impact"])
        if (road_lo, road_hi, bus_lo, bus_hi) != (
            float("-inf"), float("inf"), float("-inf"), float("inf"),
        ):
            report = filter_impact(report, (road_lo, road_hi), (bus_lo, bus_hi))
        return impact_to_dict(report)

    @app.get(f"{API_PREFIX}/schemas/siting-request")
    def get_siting_schema():
        return SitingRequest.model_json_schema()

    @app.get(f"{API_PREFIX}/schemas/{{name}}")
    def get_response_schema(name: str):
        from .schemas import RESPONSE_SCHEMAS

        schema = RESPONSE_SCHEMAS.get(name)
        if schema is None:
            raise HTTPException(404, detail={"error": "unknown-schema"})
        return schema

    if ui_dist and Path(ui_dist).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dist), html=True), name="ui")

    return app

"""Record API payloads from the toy scenario for fixture-replay tests.

Run from the repository root after any contract change:

    python3 frontend/scripts/record_fixtures.py

Everything is deterministic (fixed seed, single-threaded solver), so the
fixtures only change when the backend's wire format or numerics change.
"""

import json
import tempfile
import time
from pathlib import Path

from fastapi.testclient import TestClient

from chargeplan.coupled import CoupledConfig
from chargeplan.service import create_app

ROOT = Path(__file__).resolve().parent.parent.parent
OUT = Path(__file__).resolve().parent.parent / "fixtures"
SITING_BODY = {
    "weights": {"w1": 1.0, "w2": 1.0, "w3": 1.0},
    "stations": 2,
    "chargers": [6, 20],
    "children": 10,
    "iterations": 8,
    "seed": 2024,
}


def save(name: str, payload) -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / name).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    print(f"wrote fixtures/{name}")


def main() -> None:
    with tempfile.TemporaryDirectory() as results:
        app = create_app(
            ROOT / "src" / "chargeplan" / "data" / "toy",
            results_dir=results,
            config=CoupledConfig(ue_tol=1e-4, ue_max_iter=300, retain_paths=True),
            hotspot_count=3,
        )
        client = TestClient(app)

        save("scenario.json", client.get("/api/v1/scenario").json())
        for label in ("h08", "h18"):
            save(f"state-{label}.json", client.get(f"/api/v1/state/{label}").json())
        for layout in ("rank", "link", "volume"):
            save(
                f"hotspots-{layout}.json",
                client.get(f"/api/v1/hotspots?layout={layout}").json(),
            )
        save("stations.json", client.get("/api/v1/stations").json())
        for sid in ("S1", "S2"):
            save(f"station-series-{sid}.json",
                 client.get(f"/api/v1/stations/{sid}/series").json())
        save("station-attribution-S1.json",
             client.get("/api/v1/stations/S1/attribution").json())
        save("siting-request-schema.json",
             client.get("/api/v1/schemas/siting-request").json())

        handle = client.post("/api/v1/siting", json=SITING_BODY).json()
        save("siting-accepted.json", handle)
        while True:
            job = client.get(f"/api/v1/jobs/{handle['id']}").json()
            if job["status"] in ("done", "failed"):
                break
            time.sleep(0.05)
        assert job["status"] == "done", job
        save("job-done.json", job)
        save("solutions.json", client.get("/api/v1/solutions").json())
        for plan in ("plan-1", "plan-2", "plan-3"):
            save(f"impact-{plan}.json",
                 client.get(f"/api/v1/solutions/{plan}/impact").json())
        save("impact-plan-1-increases.json",
             client.get("/api/v1/solutions/plan-1/impact?road_lo=0&road_hi=1e9").json())


if __name__ == "__main__":
    main()

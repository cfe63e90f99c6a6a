"""Drive the HTTP service in-process: the same calls the browser UI makes.

For a live server run `chargeplan serve --scenario <dir> --port 8080` and
point the frontend at it; here a test client keeps the demo hermetic.
"""

import tempfile
import time
from pathlib import Path

from fastapi.testclient import TestClient

from chargeplan.coupled import CoupledConfig
from chargeplan.service import create_app

DATA = Path(__file__).parent.parent / "src" / "chargeplan" / "data"

with tempfile.TemporaryDirectory() as results:
    app = create_app(
        DATA / "toy",
        results_dir=results,
        config=CoupledConfig(ue_tol=1e-3, ue_max_iter=150, retain_paths=True),
        hotspot_count=3,
    )
    client = TestClient(app)

    print("GET /api/v1/scenario ->", client.get("/api/v1/scenario").json())

    state = client.get("/api/v1/state/h08").json()
    print(f"\nGET /api/v1/state/h08 -> {len(state['link_volume'])} link volumes, "
          f"total demand {state['total_demand']:.1f} kWh")

    hotspots = client.get("/api/v1/hotspots?layout=rank").json()
    print(f"GET /api/v1/hotspots -> {len(hotspots['hotspots'])} hotspots, "
          f"{len(hotspots['links'])} timeline links")

    body = {
        "weights": {"w1": 1.0, "w2": 1.0, "w3": 0.5},
        "stations": 2,
        "chargers": [6, 20],
        "children": 10,
        "iterations": 8,
        "seed": 3,
    }
    handle = client.post("/api/v1/siting", json=body).json()
    print(f"\nPOST /api/v1/siting -> job {handle['id']} ({handle['status']})")
    while True:
        job = client.get(f"/api/v1/jobs/{handle['id']}").json()
        if job["status"] in ("done", "failed"):
            break
        print(f"  polling: {job['status']} progress={job['progress']:.2f}")
        time.sleep(0.2)
    print(f"  finished: {job['status']}")

    solutions = client.get("/api/v1/solutions").json()
    for sol in solutions["solutions"]:
        print(f"  {sol['id']}: coverage {sol['coverage']:.3f}, "
              f"investment {sol['investment']:.2f}, placements {sol['placements']}")

    impact = client.get(
        "/api/v1/solutions/plan-1/impact?road_lo=0&road_hi=1000"
    ).json()
    first = impact["slices"][0]
    print(f"\nimpact of plan-1 in {first['slice']}: "
          f"{first['affected_road_count']} roads / {first['affected_bus_count']} buses affected")

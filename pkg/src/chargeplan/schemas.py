"""Published JSON Schemas for every /api/v1 response payload.

The service exposes these under /api/v1/schemas/{name}; the contract
tests validate live responses against them, and UI builds can fetch them
to pin their expectations.
"""

from __future__ import annotations

_NUM = {"type": "number"}
_INT = {"type": "integer"}
_STR = {"type": "string"}
_BOOL = {"type": "boolean"}


def _obj(properties: dict, required: list[str] | None = None) -> dict:
    return {
        "type": "object",
        "properties": properties,
        "required": sorted(required if required is not None else list(properties)),
        "additionalProperties": False,
    }


def _map_of(value: dict) -> dict:
    return {"type": "object", "additionalProperties": value}


def _array(items: dict) -> dict:
    return {"type": "array", "items": items}


_VIOLATION = _obj({"code": _STR, "entity": _STR, "message": _STR})

SCENARIO = _obj(
    {
        "nodes": _INT,
        "links": _INT,
        "od_entries": _INT,
        "slices": _array(_STR),
        "stations": _INT,
        "buses": _INT,
        "grid_lines": _INT,
        "ev_share": _NUM,
        "charge_propensity": _NUM,
        "energy_per_vehicle": _NUM,
        "validation": _obj({"ok": _BOOL, "violations": _array(_VIOLATION)}),
        "road": _obj(
            {
                "nodes": _array(
                    _obj({"id": _INT, "lat": _NUM, "lon": _NUM, "has_station": _BOOL})
                ),
                "links": _array(
                    _obj(
                        {
                            "id": _INT,
                            "from": _INT,
                            "to": _INT,
                            "capacity": _NUM,
                            "length": _NUM,
                            "free_flow_time": _NUM,
                        }
                    )
                ),
            }
        ),
    }
)

STATE = _obj(
    {
        "slice": _STR,
        "link_volume": _map_of(_NUM),
        "node_demand": _map_of(_NUM),
        "node_assignment": _map_of(_STR),
        "station_assigned": _map_of(_NUM),
        "station_served": _map_of(_NUM),
        "bus_load": _map_of(_NUM),
        "bus_voltage": _map_of(_NUM),
        "bus_price": _map_of(_NUM),
        "station_voltage": _map_of(_NUM),
        "station_price": _map_of(_NUM),
        "total_demand": _NUM,
        "unserved_demand": _NUM,
    }
)

HOTSPOTS = _obj(
    {
        "layout": {"enum": ["rank", "link", "volume"]},
        "hotspots": _array(
            _obj(
                {
                    "id": _STR,
                    "slice": _STR,
                    "nodes": _array(_INT),
                    "links": _array(_INT),
                    "avg_volume": _NUM,
                    "area_size": _INT,
                    "demand_share": _NUM,
                    "served_share": _NUM,
                    "rank": _INT,
                }
            )
        ),
        "links": _array(_obj({"from": _STR, "to": _STR, "similarity": _NUM})),
    }
)

STATIONS = _array(
    _obj(
        {
            "id": _STR,
            "name": _STR,
            "node": _INT,
            "lat": _NUM,
            "lon": _NUM,
            "chargers": _INT,
            "is_existing": _BOOL,
            "coverage": _NUM,
            "voltage_min": {"type": ["number", "null"]},
            "voltage_max": {"type": ["number", "null"]},
        }
    )
)

STATION_SERIES = _obj(
    {
        "station": _STR,
        "series": _array(
            _obj(
                {
                    "slice": _STR,
                    "assigned_kwh": _NUM,
                    "served_kwh": _NUM,
                    "coverage": _NUM,
                    "voltage": {"type": ["number", "null"]},
                }
            )
        ),
    }
)

ATTRIBUTION = _obj(
    {
        "station": _STR,
        "node": _INT,
        "slices": _array(_obj({"slice": _STR, "attributable": _map_of(_NUM)})),
    }
)

JOB = _obj(
    {
        "id": _STR,
        "kind": {"enum": ["coupled-run", "siting-run"]},
        "status": {"enum": ["queued", "running", "done", "failed"]},
        "progress": _NUM,
        "result": {"type": ["string", "null"]},
        "error": {"type": ["string", "null"]},
    }
)

_SOLUTION = _obj(
    {
        "id": _STR,
        "placements": _array(_obj({"node": _INT, "chargers": _INT})),
        "objective": _NUM,
        "coverage": _NUM,
        "service_time": _NUM,
        "investment": _NUM,
    }
)

SOLUTIONS = _obj(
    {
        "job": {"type": ["string", "null"]},
        "solutions": _array(_SOLUTION),
    }
)

IMPACT = _obj(
    {
        "road_threshold": _NUM,
        "bus_threshold": _NUM,
        "slices": _array(
            _obj(
                {
                    "slice": _STR,
                    "coverage": _NUM,
                    "affected_road_count": _INT,
                    "affected_bus_count": _INT,
                    "mean_abs_road_delta": _NUM,
                    "mean_abs_voltage_delta": _NUM,
                    "road_delta": _map_of(_NUM),
                    "voltage_delta": _map_of(_NUM),
                }
            )
        ),
    }
)

RESPONSE_SCHEMAS: dict[str, dict] = {
    "scenario": SCENARIO,
    "state": STATE,
    "hotspots": HOTSPOTS,
    "stations": STATIONS,
    "station-series": STATION_SERIES,
    "attribution": ATTRIBUTION,
    "job": JOB,
    "solutions": SOLUTIONS,
    "impact": IMPACT,
}

"""Baseline vs post-deployment deltas for roads and buses.

Deltas are signed percentages; the denominator is guarded by an epsilon
(1 vehicle, 1e-6 pu) so zero-baseline links cannot blow up the report.
Affected counts use a configurable absolute-percentage threshold and feed
the impact timeline bars.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

from .ingest import ParseError
from .model import TimeSlicedState

IMPACT_VERSION = "1"

ROAD_EPS = 1.0      # vehicles
VOLTAGE_EPS = 1e-6  # per-unit


class TopologyMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class SliceImpact:
    slice: str
    road_delta: dict[int, float]      # % change per link
    voltage_delta: dict[int, float]   # % change per bus
    coverage: float                   # deployed served share this slice
    affected_road_count: int
    affected_bus_count: int
    mean_abs_road_delta: float
    mean_abs_voltage_delta: float


@dataclass(frozen=True)
class ImpactReport:
    slices: tuple[SliceImpact, ...]
    road_threshold: float
    bus_threshold: float

    def coverage_series(self) -> list[float]:
        return [s.coverage for s in self.slices]


def _percent(new: float, old: float, eps: float) -> float:
    if new == old:
        return 0.0
    return 100.0 * (new - old) / max(old, eps)


def _counts(
    road_delta: dict[int, float],
    voltage_delta: dict[int, float],
    road_threshold: float,
    bus_threshold: float,
) -> tuple[int, int, float, float]:
    roads = sum(1 for d in road_delta.values() if abs(d) >= road_threshold)
    buses = sum(1 for d in voltage_delta.values() if abs(d) >= bus_threshold)
    mean_road = (
        sum(abs(d) for d in road_delta.values()) / len(road_delta) if road_delta else 0.0
    )
    mean_bus = (
        sum(abs(d) for d in voltage_delta.values()) / len(voltage_delta)
        if voltage_delta
        else 0.0
    )
    return roads, buses, mean_road, mean_bus


def diff_states(
    baseline: TimeSlicedState,
    deployed: TimeSlicedState,
    road_threshold: float = 1.0,
    bus_threshold: float = 1.0,
) -> ImpactReport:
    """Per-slice signed % deltas between two states of the same scenario."""
    if baseline.labels() != deployed.labels():
        raise TopologyMismatchError(
            f"slice labels differ: {baseline.labels()} vs {deployed.labels()}"
        )
    out: list[SliceImpact] = []
    for b, d in zip(baseline.slices, deployed.slices):
        if set(b.link_volume) != set(d.link_volume):
            raise TopologyMismatchError(f"link sets differ in slice {b.slice}")
        if set(b.bus_voltage) != set(d.bus_voltage):
            raise TopologyMismatchError(f"bus sets differ in slice {b.slice}")
        road_delta = {
            lid: _percent(d.link_volume[lid], b.link_volume[lid], ROAD_EPS)
            for lid in sorted(b.link_volume)
        }
        voltage_delta = {
            bid: _percent(d.bus_voltage[bid], b.bus_voltage[bid], VOLTAGE_EPS)
            for bid in sorted(b.bus_voltage)
        }
        total = d.total_demand()
        coverage = sum(d.station_served.values()) / total if total > 0 else 0.0
        coverage = min(max(coverage, 0.0), 1.0)  # shed a summation ulp
        roads, buses, mean_road, mean_bus = _counts(
            road_delta, voltage_delta, road_threshold, bus_threshold
        )
        out.append(
            SliceImpact(
                slice=b.slice,
                road_delta=road_delta,
                voltage_delta=voltage_delta,
                coverage=coverage,
                affected_road_count=roads,
                affected_bus_count=buses,
                mean_abs_road_delta=mean_road,
                mean_abs_voltage_delta=mean_bus,
            )
        )
    return ImpactReport(
        slices=tuple(out), road_threshold=road_threshold, bus_threshold=bus_threshold
    )


def filter_impact(
    report: ImpactReport,
    road_range: tuple[float, float] = (float("-inf"), float("inf")),
    bus_range: tuple[float, float] = (float("-inf"), float("inf")),
) -> ImpactReport:
    """Keep only deltas inside the closed ranges; counts recomputed."""
    for lo, hi in (road_range, bus_range):
        if lo > hi:
            raise ValueError(f"range [{lo}, {hi}] is inverted")
    out: list[SliceImpact] = []
    for s in report.slices:
        road_delta = {
            lid: d for lid, d in s.road_delta.items() if road_range[0] <= d <= road_range[1]
        }
        voltage_delta = {
            bid: d for bid, d in s.voltage_delta.items() if bus_range[0] <= d <= bus_range[1]
        }
        roads, buses, mean_road, mean_bus = _counts(
            road_delta, voltage_delta, report.road_threshold, report.bus_threshold
        )
        out.append(
            SliceImpact(
                slice=s.slice,
                road_delta=road_delta,
                voltage_delta=voltage_delta,
                coverage=s.coverage,
                affected_road_count=roads,
                affected_bus_count=buses,
                mean_abs_road_delta=mean_road,
                mean_abs_voltage_delta=mean_bus,
            )
        )
    return ImpactReport(
        slices=tuple(out),
        road_threshold=report.road_threshold,
        bus_threshold=report.bus_threshold,
    )


# ---------------------------------------------------------------------------
# Report file
# ---------------------------------------------------------------------------

def write_impact(report: ImpactReport) -> str:
    out = io.StringIO()
    out.write(f"chargeplan-impact {IMPACT_VERSION}\n")
    out.write(f"thresholds {report.road_threshold!r} {report.bus_threshold!r}\n")
    for s in report.slices:
        out.write(f"slice {s.slice}\n")
        out.write(f"coverage {s.coverage!r}\n")
        out.write(f"affected {s.affected_road_count} {s.affected_bus_count}\n")
        for lid in sorted(s.road_delta):
            out.write(f"road_delta {lid} {s.road_delta[lid]!r}\n")
        for bid in sorted(s.voltage_delta):
            out.write(f"voltage_delta {bid} {s.voltage_delta[bid]!r}\n")
        out.write("end_slice\n")
    return out.getvalue()


def read_impact(text: str | bytes) -> ImpactReport:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("invalid-utf8", str(exc)) from exc
    lines = text.splitlines()
    if not lines or not lines[0].startswith("chargeplan-impact"):
        raise ParseError("syntax", "missing impact header")
    if lines[0].split()[-1] != IMPACT_VERSION:
        raise ParseError("unsupported-version", f"impact version {lines[0].split()[-1]!r}")
    road_threshold = bus_threshold = 1.0
    slices: list[SliceImpact] = []
    label: str | None = None
    coverage = 0.0
    counts = (0, 0)
    road_delta: dict[int, float] = {}
    voltage_delta: dict[int, float] = {}
    for no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "thresholds":
                road_threshold, bus_threshold = float(parts[1]), float(parts[2])
            elif parts[0] == "slice":
                label = parts[1]
                coverage, counts = 0.0, (0, 0)
                road_delta, voltage_delta = {}, {}
            elif parts[0] == "coverage":
                coverage = float(parts[1])
            elif parts[0] == "affected":
                counts = (int(parts[1]), int(parts[2]))
            elif parts[0] == "road_delta":
                road_delta[int(parts[1])] = float(parts[2])
            elif parts[0] == "voltage_delta":
                voltage_delta[int(parts[1])] = float(parts[2])
            elif parts[0] == "end_slice":
                if label is None:
                    raise ParseError("syntax", "end_slice outside slice", no)
                roads, buses, mean_road, mean_bus = _counts(
                    road_delta, voltage_delta, road_threshold, bus_threshold
                )
                slices.append(
                    SliceImpact(
                        slice=label,
                        road_delta=road_delta,
                        voltage_delta=voltage_delta,
                        coverage=coverage,
                        affected_road_count=counts[0],
                        affected_bus_count=counts[1],
                        mean_abs_road_delta=mean_road,
                        mean_abs_voltage_delta=mean_bus,
                    )
                )
                label = None
            else:
                raise ParseError("syntax", f"unknown row kind {parts[0]!r}", no)
        except (IndexError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError("syntax", f"malformed row {line!r}", no) from exc
    if label is not None:
        raise ParseError("syntax", "impact file ends inside a slice block")
    return ImpactReport(
        slices=tuple(slices), road_threshold=road_threshold, bus_threshold=bus_threshold
    )

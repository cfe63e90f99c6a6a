// Impact view: coverage-over-time curves for every plan; selecting one
// turns its time points into dual bars (blue roads, purple grid) sized by
// the affected-element counts. Clicking a slice opens the spatial layers:
// roads colored by traffic-volume delta and buses by voltage delta,
// already filtered by the tracker ranges upstream.

import * as d3 from 'd3';

import type { ImpactReport, RoadGeometry } from '../types';

export interface ImpactOptions {
  active?: string | null;
  selectedSlice?: string | null;
  geometry?: RoadGeometry;
  onSelectSlice?: (slice: string) => void;
  width?: number;
  height?: number;
}

export function renderImpact(
  container: HTMLElement,
  reports: Map<string, ImpactReport>,
  options: ImpactOptions = {},
): void {
  const width = options.width ?? 680;
  const height = options.height ?? 240;
  const root = d3.select(container);
  root.selectAll('*').remove();

  if (reports.size === 0) {
    root.append('div').attr('class', 'empty-note').text('run a siting search first');
    return;
  }

  const svg = root
    .append('svg')
    .attr('class', 'impact-chart')
    .attr('width', width)
    .attr('height', height);

  const anyReport = [...reports.values()][0];
  const slices = anyReport.slices.map((s) => s.slice);
  const x = d3.scalePoint<string>().domain(slices).range([50, width - 20]).padding(0.3);
  const y = d3.scaleLinear().domain([0, 1]).range([height - 40, 16]);

  svg
    .selectAll('text.slice-tick')
    .data(slices)
    .join('text')
    .attr('class', 'slice-tick')
    .attr('x', (s) => x(s) ?? 0)
    .attr('y', height - 20)
    .attr('text-anchor', 'middle')
    .text((s) => s);

  const line = d3
    .line<{ slice: string; coverage: number }>()
    .x((d) => x(d.slice) ?? 0)
    .y((d) => y(d.coverage));

  for (const [solutionId, report] of reports) {
    const isActive = solutionId === options.active;
    svg
      .append('path')
      .attr('class', isActive ? 'coverage-curve active' : 'coverage-curve')
      .attr('data-solution', solutionId)
      .attr('fill', 'none')
      .attr('stroke', isActive ? '#d0342c' : '#9aa5b1')
      .attr('stroke-width', isActive ? 2.6 : 1.2)
      .attr(
        'd',
        line(report.slices.map((s) => ({ slice: s.slice, coverage: s.coverage }))),
      );

    if (!isActive) {
      // inactive plans keep plain circles at their time points
      svg
        .selectAll(`circle.point-${solutionId}`)
        .data(report.slices)
        .join('circle')
        .attr('class', `coverage-point point-${solutionId}`)
        .attr('cx', (s) => x(s.slice) ?? 0)
        .attr('cy', (s) => y(s.coverage))
        .attr('r', 2.5)
        .attr('fill', '#9aa5b1');
    }
  }

  // the active plan's circles become dual bars sized by affected counts
  const active = options.active ? reports.get(options.active) : undefined;
  if (active) {
    const maxCount = Math.max(
      ...active.slices.map((s) => Math.max(s.affected_road_count, s.affected_bus_count)),
      1,
    );
    const barH = d3.scaleLinear().domain([0, maxCount]).range([0, 60]);
    const bars = svg
      .selectAll('g.impact-bars')
      .data(active.slices)
      .join('g')
      .attr('class', 'impact-bars')
      .attr('data-slice', (s) => s.slice)
      .attr('transform', (s) => `translate(${(x(s.slice) ?? 0) - 5},0)`)
      .style('cursor', 'pointer')
      .on('click', (_event, s) => options.onSelectSlice?.(s.slice));
    bars
      .filter((s) => s.affected_road_count > 0)
      .append('rect')
      .attr('class', 'bar-roads')
      .attr('x', 0)
      .attr('width', 4)
      .attr('y', (s) => y(s.coverage) - barH(s.affected_road_count))
      .attr('height', (s) => barH(s.affected_road_count))
      .attr('fill', '#2e6fdb')
      .append('title')
      .text((s) => `${s.affected_road_count} roads affected`);
    bars
      .filter((s) => s.affected_bus_count > 0)
      .append('rect')
      .attr('class', 'bar-buses')
      .attr('x', 6)
      .attr('width', 4)
      .attr('y', (s) => y(s.coverage) - barH(s.affected_bus_count))
      .attr('height', (s) => barH(s.affected_bus_count))
      .attr('fill', '#7d3c98')
      .append('title')
      .text((s) => `${s.affected_bus_count} grid buses affected`);
  }

  // spatial layers for the clicked slice of the active plan
  if (active && options.selectedSlice && options.geometry) {
    const sliceImpact = active.slices.find((s) => s.slice === options.selectedSlice);
    if (sliceImpact) {
      renderSpatial(root, options.geometry, sliceImpact.road_delta, sliceImpact.voltage_delta);
    }
  }
}

function renderSpatial(
  root: d3.Selection<HTMLElement, unknown, null, undefined>,
  geometry: RoadGeometry,
  roadDelta: Record<string, number>,
  voltageDelta: Record<string, number>,
): void {
  const width = 340;
  const height = 280;
  const svg = root
    .append('svg')
    .attr('class', 'impact-spatial')
    .attr('width', width)
    .attr('height', height);

  const lonExtent = d3.extent(geometry.nodes, (n) => n.lon) as [number, number];
  const latExtent = d3.extent(geometry.nodes, (n) => n.lat) as [number, number];
  const x = d3.scaleLinear().domain(lonExtent).range([16, width - 16]);
  const y = d3.scaleLinear().domain(latExtent).range([height - 16, 16]);
  const nodeById = new Map(geometry.nodes.map((n) => [n.id, n]));

  const maxAbsRoad = Math.max(...Object.values(roadDelta).map(Math.abs), 1e-9);
  const roadColor = d3
    .scaleDiverging<string>()
    .domain([-maxAbsRoad, 0, maxAbsRoad])
    .interpolator(d3.interpolateRdBu)
    .clamp(true);

  for (const link of geometry.links) {
    const delta = roadDelta[String(link.id)];
    if (delta === undefined) continue; // filtered out by the tracker
    const a = nodeById.get(link.from);
    const b = nodeById.get(link.to);
    if (!a || !b) continue;
    svg
      .append('line')
      .attr('class', 'impact-road')
      .attr('data-link', link.id)
      .attr('data-delta', delta)
      .attr('x1', x(a.lon))
      .attr('y1', y(a.lat))
      .attr('x2', x(b.lon))
      .attr('y2', y(b.lat))
      .attr('stroke', roadColor(-delta)) // red = volume increase
      .attr('stroke-width', 2)
      .append('title')
      .text(`link ${link.id}: ${delta >= 0 ? '+' : ''}${delta.toFixed(1)}% traffic`);
  }

  // grid buses have no road coordinates; render them as a labeled strip
  const buses = Object.keys(voltageDelta).sort((a, b) => Number(a) - Number(b));
  const busX = d3.scalePoint<string>().domain(buses).range([24, width - 24]).padding(0.5);
  const maxAbsBus = Math.max(...Object.values(voltageDelta).map(Math.abs), 1e-9);
  const busColor = d3
    .scaleDiverging<string>()
    .domain([-maxAbsBus, 0, maxAbsBus])
    .interpolator(d3.interpolatePRGn)
    .clamp(true);
  svg
    .selectAll('circle.impact-bus')
    .data(buses)
    .join('circle')
    .attr('class', 'impact-bus')
    .attr('data-bus', (b) => b)
    .attr('data-delta', (b) => voltageDelta[b])
    .attr('cx', (b) => busX(b) ?? 0)
    .attr('cy', height - 8)
    .attr('r', 5)
    .attr('fill', (b) => busColor(voltageDelta[b]))
    .append('title')
    .text((b) => `bus ${b}: ${voltageDelta[b] >= 0 ? '+' : ''}${voltageDelta[b].toFixed(2)}% voltage`);
}

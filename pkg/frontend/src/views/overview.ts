// Temporal overview: hotspots per slice as rectangles (opacity = charging
// demand share), laid out by rank, average volume, or rank-with-links.
// Past the zoom threshold each rectangle becomes a glyph: the road network
// in miniature with the hotspot's streets highlighted, plus two bars —
// orange for demand share, purple for served share. Orange rising above
// purple is the visual cue for unmet charging demand.

import * as d3 from 'd3';

import type { Hotspot, OverviewLayout, RoadGeometry, Timeline } from '../types';

export const GLYPH_ZOOM_THRESHOLD = 2;

export interface OverviewOptions {
  layout: OverviewLayout;
  zoom: number;
  geometry: RoadGeometry;
  selectedHotspot?: string | null;
  onSelect?: (hotspotId: string) => void;
  width?: number;
  height?: number;
}

interface Cell {
  hotspot: Hotspot;
  x: number;
  y: number;
}

export function renderOverview(
  container: HTMLElement,
  timeline: Timeline,
  options: OverviewOptions,
): void {
  const width = options.width ?? 720;
  const height = options.height ?? 260;
  const root = d3.select(container);
  root.selectAll('*').remove();

  if (timeline.hotspots.length === 0) {
    root.append('div').attr('class', 'empty-note').text('no hotspots in this window');
    return;
  }

  const svg = root
    .append('svg')
    .attr('class', 'overview')
    .attr('width', width)
    .attr('height', height);

  const slices = [...new Set(timeline.hotspots.map((h) => h.slice))].sort();
  const sliceX = d3
    .scalePoint<string>()
    .domain(slices)
    .range([70, width - 30])
    .padding(0.5);
  const maxRank = d3.max(timeline.hotspots, (h) => h.rank) ?? 1;
  const maxVolume = d3.max(timeline.hotspots, (h) => h.avg_volume) ?? 1;
  const rankY = d3.scaleLinear().domain([1, Math.max(maxRank, 2)]).range([40, height - 50]);
  const volumeY = d3.scaleLinear().domain([0, maxVolume]).range([height - 50, 30]);

  const cells: Cell[] = timeline.hotspots.map((h) => ({
    hotspot: h,
    x: sliceX(h.slice) ?? 0,
    y: options.layout === 'volume' ? volumeY(h.avg_volume) : rankY(h.rank),
  }));
  const byId = new Map(cells.map((c) => [c.hotspot.id, c]));

  // time axis labels
  svg
    .selectAll('text.slice-label')
    .data(slices)
    .join('text')
    .attr('class', 'slice-label')
    .attr('x', (s) => sliceX(s) ?? 0)
    .attr('y', height - 12)
    .attr('text-anchor', 'middle')
    .text((s) => s);

  // similarity edges only in the link layout; zero-similarity never draws
  if (options.layout === 'link') {
    const edges = timeline.links.filter(
      (e) => e.similarity > 0 && byId.has(e.from) && byId.has(e.to),
    );
    svg
      .selectAll('line.hotspot-edge')
      .data(edges)
      .join('line')
      .attr('class', 'hotspot-edge')
      .attr('x1', (e) => byId.get(e.from)!.x)
      .attr('y1', (e) => byId.get(e.from)!.y)
      .attr('x2', (e) => byId.get(e.to)!.x)
      .attr('y2', (e) => byId.get(e.to)!.y)
      .attr('stroke', '#d0342c')
      .attr('stroke-width', (e) => 1 + 5 * e.similarity);
  }

  const demandOpacity = d3
    .scaleLinear()
    .domain([0, Math.max(d3.max(timeline.hotspots, (h) => h.demand_share) ?? 1, 1e-9)])
    .range([0.2, 1.0]);

  if (options.zoom <= GLYPH_ZOOM_THRESHOLD) {
    svg
      .selectAll('rect.hotspot-cell')
      .data(cells)
      .join('rect')
      .attr('class', (c) =>
        c.hotspot.id === options.selectedHotspot
          ? 'hotspot-cell selected'
          : 'hotspot-cell',
      )
      .attr('data-hotspot', (c) => c.hotspot.id)
      .attr('x', (c) => c.x - 18)
      .attr('y', (c) => c.y - 9)
      .attr('width', 36)
      .attr('height', 18)
      .attr('fill', '#e8871e')
      .attr('fill-opacity', (c) => demandOpacity(c.hotspot.demand_share))
      .on('click', (_event, c) => options.onSelect?.(c.hotspot.id));
    return;
  }

  // glyph mode
  const glyph = svg
    .selectAll('g.hotspot-glyph')
    .data(cells)
    .join('g')
    .attr('class', (c) =>
      c.hotspot.id === options.selectedHotspot
        ? 'hotspot-glyph selected'
        : 'hotspot-glyph',
    )
    .attr('data-hotspot', (c) => c.hotspot.id)
    .attr('transform', (c) => `translate(${c.x - 30},${c.y - 24})`)
    .on('click', (_event, c) => options.onSelect?.(c.hotspot.id));

  const glyphWidth = 60;
  const glyphHeight = 48;
  const barArea = 14;
  const barMax = glyphHeight - 6;

  glyph
    .append('rect')
    .attr('class', 'glyph-frame')
    .attr('width', glyphWidth)
    .attr('height', glyphHeight)
    .attr('fill', 'white')
    .attr('stroke', '#bbb');

  // demand (orange) and served (purple) bars share one linear scale, so
  // orange is strictly taller exactly when demand share exceeds served.
  const barScale = d3.scaleLinear().domain([0, 1]).range([0, barMax]);
  glyph
    .append('rect')
    .attr('class', 'bar-demand')
    .attr('x', 2)
    .attr('width', 4)
    .attr('y', (c) => glyphHeight - 3 - barScale(c.hotspot.demand_share))
    .attr('height', (c) => barScale(c.hotspot.demand_share))
    .attr('fill', '#e8871e');
  glyph
    .append('rect')
    .attr('class', 'bar-served')
    .attr('x', 8)
    .attr('width', 4)
    .attr('y', (c) => glyphHeight - 3 - barScale(c.hotspot.served_share))
    .attr('height', (c) => barScale(c.hotspot.served_share))
    .attr('fill', '#7d3c98');

  // miniature road network with member streets in blue
  const lonExtent = d3.extent(options.geometry.nodes, (n) => n.lon) as [number, number];
  const latExtent = d3.extent(options.geometry.nodes, (n) => n.lat) as [number, number];
  const miniX = d3
    .scaleLinear()
    .domain(lonExtent)
    .range([barArea + 4, glyphWidth - 4]);
  const miniY = d3.scaleLinear().domain(latExtent).range([glyphHeight - 6, 6]);
  const nodeById = new Map(options.geometry.nodes.map((n) => [n.id, n]));

  glyph.each(function (cell) {
    const members = new Set(cell.hotspot.nodes);
    const group = d3.select(this);
    for (const link of options.geometry.links) {
      if (link.from >= link.to) continue; // draw each street once
      const a = nodeById.get(link.from);
      const b = nodeById.get(link.to);
      if (!a || !b) continue;
      const inside = members.has(link.from) && members.has(link.to);
      group
        .append('line')
        .attr('class', inside ? 'glyph-road member' : 'glyph-road')
        .attr('x1', miniX(a.lon))
        .attr('y1', miniY(a.lat))
        .attr('x2', miniX(b.lon))
        .attr('y2', miniY(b.lat))
        .attr('stroke', inside ? '#2e6fdb' : '#ddd')
        .attr('stroke-width', inside ? 1.6 : 0.7);
    }
  });
}

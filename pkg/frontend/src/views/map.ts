// Map view: the road network drawn straight from coordinates (no tile
// dependency), roads shaded by traffic volume, orange circles for node
// charging demand, a glyph per station (sectors for size, price, service
// time; a voltage band beside it), red markers for the active solution's
// proposed sites, and, with a station selected, its catchment roads
// highlighted with attributable-vs-total volume.

import * as d3 from 'd3';

import type {
  Attribution,
  Placement,
  RoadGeometry,
  SliceState,
  StationRow,
} from '../types';

export interface MapOptions {
  selectedStation?: string | null;
  attribution?: Attribution | null;
  newStations?: Placement[];
  onSelectStation?: (stationId: string) => void;
  width?: number;
  height?: number;
}

export function renderMap(
  container: HTMLElement,
  geometry: RoadGeometry,
  state: SliceState,
  stations: StationRow[],
  options: MapOptions = {},
): void {
  const width = options.width ?? 640;
  const height = options.height ?? 520;
  const root = d3.select(container);
  root.selectAll('*').remove();
  const svg = root
    .append('svg')
    .attr('class', 'mapview')
    .attr('width', width)
    .attr('height', height);

  const lonExtent = d3.extent(geometry.nodes, (n) => n.lon) as [number, number];
  const latExtent = d3.extent(geometry.nodes, (n) => n.lat) as [number, number];
  const x = d3.scaleLinear().domain(lonExtent).range([40, width - 40]);
  const y = d3.scaleLinear().domain(latExtent).range([height - 40, 40]);
  const nodeById = new Map(geometry.nodes.map((n) => [n.id, n]));

  const volumes = geometry.links.map((l) => state.link_volume[String(l.id)] ?? 0);
  const maxVolume = Math.max(...volumes, 1);
  const roadWidth = d3.scaleSqrt().domain([0, maxVolume]).range([0.6, 6]);

  const attributable = new Map<number, number>();
  if (options.attribution) {
    const bySlice = options.attribution.slices.find((s) => s.slice === state.slice);
    if (bySlice) {
      for (const [lid, volume] of Object.entries(bySlice.attributable)) {
        attributable.set(Number(lid), volume);
      }
    }
  }

  // roads: one line per directed link, offset so directions stay visible
  const roads = svg.append('g').attr('class', 'roads');
  for (const link of geometry.links) {
    const a = nodeById.get(link.from);
    const b = nodeById.get(link.to);
    if (!a || !b) continue;
    const volume = state.link_volume[String(link.id)] ?? 0;
    const attributed = attributable.get(link.id) ?? 0;
    const related = attributed > 1e-9;
    const dx = y(b.lat) - y(a.lat);
    const dy = x(a.lon) - x(b.lon);
    const norm = Math.hypot(dx, dy) || 1;
    const ox = (1.5 * dx) / norm;
    const oy = (1.5 * dy) / norm;
    roads
      .append('line')
      .attr('class', related ? 'road related' : 'road')
      .attr('data-link', link.id)
      .attr('x1', x(a.lon) + ox)
      .attr('y1', y(a.lat) + oy)
      .attr('x2', x(b.lon) + ox)
      .attr('y2', y(b.lat) + oy)
      .attr('stroke', options.selectedStation ? (related ? '#2e6fdb' : '#c9c9c9') : '#6d8dc4')
      .attr('stroke-width', roadWidth(volume))
      .append('title')
      .text(
        related
          ? `link ${link.id}: ${volume.toFixed(0)} vehicles, ` +
            `${attributed.toFixed(1)} may charge at ${options.selectedStation}`
          : `link ${link.id}: ${volume.toFixed(0)} vehicles`,
      );
  }

  // charging demand per node: orange circles
  const maxDemand = Math.max(...Object.values(state.node_demand), 1e-9);
  const demandR = d3.scaleSqrt().domain([0, maxDemand]).range([0, 14]);
  svg
    .append('g')
    .attr('class', 'demand')
    .selectAll('circle.node-demand')
    .data(geometry.nodes.filter((n) => (state.node_demand[String(n.id)] ?? 0) > 0))
    .join('circle')
    .attr('class', 'node-demand')
    .attr('data-node', (n) => n.id)
    .attr('cx', (n) => x(n.lon))
    .attr('cy', (n) => y(n.lat))
    .attr('r', (n) => demandR(state.node_demand[String(n.id)] ?? 0))
    .attr('fill', '#e8871e')
    .attr('fill-opacity', 0.45);

  // station glyphs
  const maxAssigned = Math.max(...stations.map((s) => state.station_assigned[s.id] ?? 0), 1e-9);
  const stationR = d3.scaleSqrt().domain([0, maxAssigned]).range([4, 16]);
  const maxPrice = Math.max(...Object.values(state.bus_price), 1e-9);
  const glyphs = svg
    .append('g')
    .attr('class', 'stations')
    .selectAll('g.station-glyph')
    .data(stations)
    .join('g')
    .attr('class', (s) =>
      s.id === options.selectedStation ? 'station-glyph selected' : 'station-glyph',
    )
    .attr('data-station', (s) => s.id)
    .attr('transform', (s) => `translate(${x(s.lon)},${y(s.lat)})`)
    .on('click', (_event, s) => options.onSelectStation?.(s.id));

  glyphs
    .append('circle')
    .attr('class', 'station-demand')
    .attr('r', (s) => stationR(state.station_assigned[s.id] ?? 0))
    .attr('fill', '#e8871e')
    .attr('fill-opacity', 0.85);

  // three sectors: size (pink), electricity price (blue), service time (green)
  const maxChargers = Math.max(...stations.map((s) => s.chargers), 1);
  glyphs.each(function (s) {
    const assigned = state.station_assigned[s.id] ?? 0;
    const price = (state.station_price[s.id] ?? 0) / maxPrice;
    const service = s.chargers > 0 ? assigned / s.chargers : 0;
    const maxService = Math.max(
      ...stations.map((row) => (state.station_assigned[row.id] ?? 0) / Math.max(row.chargers, 1)),
      1e-9,
    );
    const sectors = [
      { name: 'size', share: s.chargers / maxChargers, color: '#e75480' },
      { name: 'price', share: price, color: '#2e6fdb' },
      { name: 'service', share: service / maxService, color: '#2f9e44' },
    ];
    const group = d3.select(this);
    const inner = stationR(assigned);
    sectors.forEach((sector, i) => {
      const start = (i * 2 * Math.PI) / 3;
      const arc = d3
        .arc()
        .innerRadius(inner + 1)
        .outerRadius(inner + 1 + 8 * Math.max(sector.share, 0.02))
        .startAngle(start)
        .endAngle(start + (2 * Math.PI) / 3 - 0.12);
      group
        .append('path')
        .attr('class', `sector sector-${sector.name}`)
        .attr('d', arc as unknown as string)
        .attr('fill', sector.color)
        .attr('fill-opacity', 0.9);
    });

    // voltage band at the left of the glyph, clamped to the plotted band
    const voltage = state.station_voltage[s.id];
    if (voltage !== undefined) {
      const bandTop = -14;
      const bandBottom = 14;
      const v = d3.scaleLinear().domain([0.9, 1.1]).range([bandBottom, bandTop]).clamp(true);
      group
        .append('line')
        .attr('class', 'voltage-band')
        .attr('x1', -inner - 12)
        .attr('x2', -inner - 12)
        .attr('y1', bandBottom)
        .attr('y2', bandTop)
        .attr('stroke', '#bbb');
      group
        .append('circle')
        .attr('class', 'voltage-now')
        .attr('cx', -inner - 12)
        .attr('cy', v(voltage))
        .attr('r', 2.5)
        .attr('fill', '#7d3c98');
    }
  });

  // proposed sites from the active solution: red markers
  const markers = svg.append('g').attr('class', 'proposed');
  for (const placement of options.newStations ?? []) {
    const node = nodeById.get(placement.node);
    if (!node) continue;
    markers
      .append('path')
      .attr('class', 'new-station-marker')
      .attr('data-node', placement.node)
      .attr(
        'd',
        `M ${x(node.lon)} ${y(node.lat) - 14} l 6 10 h -12 z`,
      )
      .attr('fill', '#d0342c')
      .append('title')
      .text(`proposed: ${placement.chargers} chargers`);
  }
}

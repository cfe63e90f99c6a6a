// Wire types for /api/v1. Field names match the server payloads exactly;
// the UI never derives model quantities, only display scaling.

export interface Violation {
  code: string;
  entity: string;
  message: string;
}

export interface RoadNode {
  id: number;
  lat: number;
  lon: number;
  has_station: boolean;
}

export interface RoadLink {
  id: number;
  from: number;
  to: number;
  capacity: number;
  length: number;
  free_flow_time: number;
}

export interface RoadGeometry {
  nodes: RoadNode[];
  links: RoadLink[];
}

export interface ScenarioSummary {
  nodes: number;
  links: number;
  od_entries: number;
  slices: string[];
  stations: number;
  buses: number;
  grid_lines: number;
  ev_share: number;
  charge_propensity: number;
  energy_per_vehicle: number;
  validation: { ok: boolean; violations: Violation[] };
  road: RoadGeometry;
}

export interface SliceState {
  slice: string;
  link_volume: Record<string, number>;
  node_demand: Record<string, number>;
  node_assignment: Record<string, string>;
  station_assigned: Record<string, number>;
  station_served: Record<string, number>;
  bus_load: Record<string, number>;
  bus_voltage: Record<string, number>;
  bus_price: Record<string, number>;
  station_voltage: Record<string, number>;
  station_price: Record<string, number>;
  total_demand: number;
  unserved_demand: number;
}

export interface Hotspot {
  id: string;
  slice: string;
  nodes: number[];
  links: number[];
  avg_volume: number;
  area_size: number;
  demand_share: number;
  served_share: number;
  rank: number;
}

export interface HotspotEdge {
  from: string;
  to: string;
  similarity: number;
}

export type OverviewLayout = 'rank' | 'link' | 'volume';

export interface Timeline {
  layout?: OverviewLayout;
  hotspots: Hotspot[];
  links: HotspotEdge[];
}

export interface StationRow {
  id: string;
  name: string;
  node: number;
  lat: number;
  lon: number;
  chargers: number;
  is_existing: boolean;
  coverage: number;
  voltage_min: number | null;
  voltage_max: number | null;
}

export interface StationSeriesPoint {
  slice: string;
  assigned_kwh: number;
  served_kwh: number;
  coverage: number;
  voltage: number | null;
}

export interface StationSeries {
  station: string;
  series: StationSeriesPoint[];
}

export interface AttributionSlice {
  slice: string;
  attributable: Record<string, number>;
}

export interface Attribution {
  station: string;
  node: number;
  slices: AttributionSlice[];
}

export interface JobHandle {
  id: string;
  kind: 'coupled-run' | 'siting-run';
  status: 'queued' | 'running' | 'done' | 'failed';
  progress: number;
  result: string | null;
  error: string | null;
}

export interface Placement {
  node: number;
  chargers: number;
}

export interface Solution {
  id: string;
  placements: Placement[];
  objective: number;
  coverage: number;
  service_time: number;
  investment: number;
}

export interface SolutionsResponse {
  job: string | null;
  solutions: Solution[];
}

export interface ImpactSlice {
  slice: string;
  coverage: number;
  affected_road_count: number;
  affected_bus_count: number;
  mean_abs_road_delta: number;
  mean_abs_voltage_delta: number;
  road_delta: Record<string, number>;
  voltage_delta: Record<string, number>;
}

export interface ImpactReport {
  road_threshold: number;
  bus_threshold: number;
  slices: ImpactSlice[];
}

export interface SitingForm {
  weights: { w1: number; w2: number; w3: number };
  stations: number;
  chargers: [number, number];
  children: number;
  iterations: number;
  seed: number;
}

// Application wiring: load the scenario, render the six views, and keep
// them in sync through the store. All data flows through the Api client;
// the views never fetch on their own.

import * as d3 from 'd3';

import { Api, httpFetcher, type ImpactRanges } from './api';
import { Store } from './state';
import type {
  ImpactReport,
  ScenarioSummary,
  SitingForm,
  SliceState,
  Solution,
  StationSeries,
} from './types';
import { renderControlPanel } from './views/control';
import { renderImpact } from './views/impact';
import { renderMap } from './views/map';
import { renderOverview } from './views/overview';
import { renderResults } from './views/results';
import { renderStationTable, type StationSort } from './views/stations';

const api = new Api(httpFetcher());
const store = new Store();

interface AppData {
  scenario: ScenarioSummary;
  states: Map<string, SliceState>;
  solutions: Solution[];
  impacts: Map<string, ImpactReport>;
  series: Map<string, StationSeries>;
  jobRunning: boolean;
  jobProgress: number;
  stationSort: StationSort;
  stationAscending: boolean;
}

async function boot(): Promise<void> {
  const scenario = await api.scenario();
  const timeline = await api.hotspots('rank');
  const stations = await api.stations();
  const states = new Map<string, SliceState>();
  for (const slice of scenario.slices) {
    states.set(slice, await api.state(slice));
  }
  const data: AppData = {
    scenario,
    states,
    solutions: [],
    impacts: new Map(),
    series: new Map(),
    jobRunning: false,
    jobProgress: 0,
    stationSort: 'coverage',
    stationAscending: false,
  };
  store.registerIds({
    slices: scenario.slices,
    hotspots: timeline.hotspots.map((h) => h.id),
    stations: stations.map((s) => s.id),
    solutions: [],
  });
  store.update({ selectedSlice: scenario.slices[0] ?? null });

  d3.select('#scenario-summary').text(
    `${scenario.nodes} intersections · ${scenario.links} roads · ` +
      `${scenario.stations} stations · ${scenario.buses} buses · ` +
      `validation ${scenario.validation.ok ? 'ok' : 'FAILED'}`,
  );

  const layoutSelect = document.querySelector<HTMLSelectElement>('#layout-select')!;
  layoutSelect.addEventListener('change', () =>
    store.update({ layout: layoutSelect.value as 'rank' | 'link' | 'volume' }),
  );
  const zoomRange = document.querySelector<HTMLInputElement>('#zoom-range')!;
  zoomRange.addEventListener('input', () =>
    store.update({ overviewZoom: Number(zoomRange.value) }),
  );
  const sliceSelect = document.querySelector<HTMLSelectElement>('#slice-select')!;
  d3.select(sliceSelect)
    .selectAll('option')
    .data(scenario.slices)
    .join('option')
    .attr('value', (s) => s)
    .text((s) => s);
  sliceSelect.addEventListener('change', () =>
    store.update({ selectedSlice: sliceSelect.value }),
  );
  document.querySelector<HTMLButtonElement>('#tracker-apply')!.addEventListener(
    'click',
    () => {
      const read = (id: string, fallback: number) => {
        const raw = document.querySelector<HTMLInputElement>(`#${id}`)!.value;
        return raw === '' ? fallback : Number(raw);
      };
      store.update({
        trackerRoad: [read('road-lo', -Infinity), read('road-hi', Infinity)],
        trackerBus: [read('bus-lo', -Infinity), read('bus-hi', Infinity)],
      });
      void refreshImpacts(data);
    },
  );

  store.subscribe(() => render(data, timeline, stations));
  render(data, timeline, stations);
}

function trackerRanges(): ImpactRanges {
  const state = store.get();
  const ranges: ImpactRanges = {};
  if (Number.isFinite(state.trackerRoad[0])) ranges.road_lo = state.trackerRoad[0];
  if (Number.isFinite(state.trackerRoad[1])) ranges.road_hi = state.trackerRoad[1];
  if (Number.isFinite(state.trackerBus[0])) ranges.bus_lo = state.trackerBus[0];
  if (Number.isFinite(state.trackerBus[1])) ranges.bus_hi = state.trackerBus[1];
  return ranges;
}

async function refreshImpacts(data: AppData): Promise<void> {
  const ranges = trackerRanges();
  for (const solution of data.solutions) {
    data.impacts.set(solution.id, await api.impact(solution.id, ranges));
  }
  store.update({}); // repaint
}

async function submitSiting(data: AppData, form: SitingForm): Promise<void> {
  data.jobRunning = true;
  data.jobProgress = 0;
  store.update({});
  try {
    const handle = await api.submitSiting(form);
    let job = handle;
    while (job.status === 'queued' || job.status === 'running') {
      await new Promise((resolve) => setTimeout(resolve, 400));
      job = await api.job(handle.id);
      data.jobProgress = job.progress;
      store.update({});
    }
    if (job.status === 'failed') {
      throw new Error(job.error ?? 'siting job failed');
    }
    const response = await api.solutions();
    data.solutions = response.solutions;
    store.registerIds({ solutions: data.solutions.map((s) => s.id) });
    await refreshImpacts(data);
    if (data.solutions.length > 0) {
      store.update({ activeSolution: data.solutions[0].id });
    }
  } finally {
    data.jobRunning = false;
    store.update({});
  }
}

function render(
  data: AppData,
  timeline: Awaited<ReturnType<Api['hotspots']>>,
  stations: Awaited<ReturnType<Api['stations']>>,
): void {
  const state = store.get();
  const geometry = data.scenario.road;

  renderOverview(document.querySelector('#overview')!, timeline, {
    layout: state.layout,
    zoom: state.overviewZoom,
    geometry,
    selectedHotspot: state.selectedHotspot,
    onSelect: (id) => store.update({ selectedHotspot: id }),
  });

  const selectedHotspot = timeline.hotspots.find((h) => h.id === state.selectedHotspot);
  renderStationTable(document.querySelector('#stations')!, stations, {
    sortBy: data.stationSort,
    ascending: data.stationAscending,
    highlightNodes: selectedHotspot ? new Set(selectedHotspot.nodes) : undefined,
    selectedStation: state.selectedStation,
    onSelect: (id) => {
      store.update({ selectedStation: id });
      void showStationDetail(data, id);
    },
    onSortChange: (sortBy, ascending) => {
      data.stationSort = sortBy;
      data.stationAscending = ascending;
      store.update({});
    },
  });

  const sliceLabel = state.selectedSlice ?? data.scenario.slices[0];
  const slice = data.states.get(sliceLabel);
  const active = data.solutions.find((s) => s.id === state.activeSolution);
  if (slice) {
    renderMap(document.querySelector('#map')!, geometry, slice, stations, {
      selectedStation: state.selectedStation,
      newStations: active?.placements ?? [],
      onSelectStation: (id) => {
        store.update({ selectedStation: id });
        void showStationDetail(data, id);
      },
    });
  }

  renderControlPanel(document.querySelector('#control')!, {
    busy: data.jobRunning,
    progress: data.jobProgress,
    onSubmit: (form) => void submitSiting(data, form),
  });

  renderResults(document.querySelector('#results')!, data.solutions, {
    active: state.activeSolution,
    onSelect: (id) => store.update({ activeSolution: id }),
  });

  renderImpact(document.querySelector('#impact')!, data.impacts, {
    active: state.activeSolution,
    selectedSlice: state.selectedSlice,
    geometry,
    onSelectSlice: (slice_) => store.update({ selectedSlice: slice_ }),
  });
}

async function showStationDetail(data: AppData, stationId: string): Promise<void> {
  if (!data.series.has(stationId)) {
    data.series.set(stationId, await api.stationSeries(stationId));
  }
  const series = data.series.get(stationId)!;
  const root = d3.select('#station-popup');
  root.selectAll('*').remove();
  root.append('h3').text(`coverage of ${stationId} over time`);
  const width = 300;
  const height = 80;
  const svg = root.append('svg').attr('width', width).attr('height', height);
  const x = d3
    .scalePoint<string>()
    .domain(series.series.map((p) => p.slice))
    .range([30, width - 10]);
  const y = d3.scaleLinear().domain([0, 1]).range([height - 16, 6]);
  const line = d3
    .line<{ slice: string; coverage: number }>()
    .x((p) => x(p.slice) ?? 0)
    .y((p) => y(p.coverage));
  svg
    .append('path')
    .attr('class', 'station-coverage-line')
    .attr('fill', 'none')
    .attr('stroke', '#e8871e')
    .attr('stroke-width', 2)
    .attr('d', line(series.series.map((p) => ({ slice: p.slice, coverage: p.coverage }))));
  store.update({}); // repaint highlights
}

void boot();

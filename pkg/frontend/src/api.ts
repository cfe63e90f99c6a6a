// Thin typed client over /api/v1 with an injectable transport, so tests
// replay recorded fixtures without a network stack.

import type {
  Attribution,
  ImpactReport,
  JobHandle,
  OverviewLayout,
  ScenarioSummary,
  SitingForm,
  SliceState,
  Solution,
  SolutionsResponse,
  StationRow,
  StationSeries,
  Timeline,
} from './types';

export type Fetcher = (
  path: string,
  init?: { method?: 'GET' | 'POST'; body?: unknown },
) => Promise<unknown>;

export function httpFetcher(base = ''): Fetcher {
  return async (path, init) => {
    const response = await fetch(base + path, {
      method: init?.method ?? 'GET',
      headers: init?.body !== undefined ? { 'content-type': 'application/json' } : undefined,
      body: init?.body !== undefined ? JSON.stringify(init.body) : undefined,
    });
    if (!response.ok) {
      throw new Error(`${path}: HTTP ${response.status}`);
    }
    return response.json();
  };
}

export interface ImpactRanges {
  road_lo?: number;
  road_hi?: number;
  bus_lo?: number;
  bus_hi?: number;
}

export class Api {
  constructor(private readonly fetcher: Fetcher) {}

  scenario(): Promise<ScenarioSummary> {
    return this.fetcher('/api/v1/scenario') as Promise<ScenarioSummary>;
  }

  state(slice: string): Promise<SliceState> {
    return this.fetcher(`/api/v1/state/${slice}`) as Promise<SliceState>;
  }

  hotspots(layout: OverviewLayout): Promise<Timeline> {
    return this.fetcher(`/api/v1/hotspots?layout=${layout}`) as Promise<Timeline>;
  }

  stations(): Promise<StationRow[]> {
    return this.fetcher('/api/v1/stations') as Promise<StationRow[]>;
  }

  stationSeries(id: string): Promise<StationSeries> {
    return this.fetcher(`/api/v1/stations/${id}/series`) as Promise<StationSeries>;
  }

  attribution(id: string): Promise<Attribution> {
    return this.fetcher(`/api/v1/stations/${id}/attribution`) as Promise<Attribution>;
  }

  submitSiting(form: SitingForm): Promise<JobHandle> {
    return this.fetcher('/api/v1/siting', { method: 'POST', body: form }) as Promise<JobHandle>;
  }

  job(id: string): Promise<JobHandle> {
    return this.fetcher(`/api/v1/jobs/${id}`) as Promise<JobHandle>;
  }

  solutions(): Promise<SolutionsResponse> {
    return this.fetcher('/api/v1/solutions') as Promise<SolutionsResponse>;
  }

  impact(solutionId: string, ranges?: ImpactRanges): Promise<ImpactReport> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(ranges ?? {})) {
      if (value !== undefined && Number.isFinite(value)) {
        params.set(key, String(value));
      }
    }
    const query = params.toString();
    const path = `/api/v1/solutions/${solutionId}/impact${query ? `?${query}` : ''}`;
    return this.fetcher(path) as Promise<ImpactReport>;
  }
}

export function solutionList(response: SolutionsResponse): Solution[] {
  return response.solutions;
}

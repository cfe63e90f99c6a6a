// Single view-state store. All mutations funnel through update(), which
// applies patches one at a time (no interleaving) and validates selections
// against the ids of the loaded scenario before accepting them.

import type { OverviewLayout } from './types';

export interface ViewState {
  layout: OverviewLayout;
  sliceRange: [number, number]; // indices into the scenario's slice list
  selectedSlice: string | null;
  selectedHotspot: string | null;
  selectedStation: string | null;
  activeSolution: string | null;
  trackerRoad: [number, number];
  trackerBus: [number, number];
  overviewZoom: number;
}

export interface KnownIds {
  slices: Set<string>;
  hotspots: Set<string>;
  stations: Set<string>;
  solutions: Set<string>;
}

const INITIAL: ViewState = {
  layout: 'rank',
  sliceRange: [0, 0],
  selectedSlice: null,
  selectedHotspot: null,
  selectedStation: null,
  activeSolution: null,
  trackerRoad: [-Infinity, Infinity],
  trackerBus: [-Infinity, Infinity],
  overviewZoom: 1,
};

export class Store {
  private state: ViewState = { ...INITIAL };
  private known: KnownIds = {
    slices: new Set(),
    hotspots: new Set(),
    stations: new Set(),
    solutions: new Set(),
  };
  private listeners = new Set<(state: ViewState) => void>();
  private applying = false;
  private queue: Partial<ViewState>[] = [];

  get(): ViewState {
    return { ...this.state };
  }

  registerIds(patch: Partial<{ [K in keyof KnownIds]: Iterable<string> }>): void {
    for (const key of ['slices', 'hotspots', 'stations', 'solutions'] as const) {
      const values = patch[key];
      if (values) {
        this.known[key] = new Set(values);
      }
    }
  }

  subscribe(listener: (state: ViewState) => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  update(patch: Partial<ViewState>): void {
    this.queue.push(patch);
    if (this.applying) {
      return; // the active update drains the queue; updates never interleave
    }
    this.applying = true;
    try {
      while (this.queue.length > 0) {
        const next = this.queue.shift()!;
        this.validate(next);
        this.state = { ...this.state, ...next };
        for (const listener of [...this.listeners]) {
          listener(this.get());
        }
      }
    } finally {
      this.applying = false;
    }
  }

  private validate(patch: Partial<ViewState>): void {
    const checks: [keyof ViewState, Set<string>][] = [
      ['selectedSlice', this.known.slices],
      ['selectedHotspot', this.known.hotspots],
      ['selectedStation', this.known.stations],
      ['activeSolution', this.known.solutions],
    ];
    for (const [field, ids] of checks) {
      const value = patch[field];
      if (typeof value === 'string' && !ids.has(value)) {
        throw new Error(`${field} refers to unknown id ${value}`);
      }
    }
    if (patch.trackerRoad && patch.trackerRoad[0] > patch.trackerRoad[1]) {
      throw new Error('trackerRoad range is inverted');
    }
    if (patch.trackerBus && patch.trackerBus[0] > patch.trackerBus[1]) {
      throw new Error('trackerBus range is inverted');
    }
  }
}

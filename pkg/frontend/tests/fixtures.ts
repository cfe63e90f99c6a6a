// Fixture-backed transport: replays payloads recorded from the real
// service. Unknown URLs throw, and the constructor wires a booby-trapped
// global fetch so any accidental network use fails the test loudly.

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import type { Fetcher } from '../src/api';

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), '..', 'fixtures');

const ROUTES: [RegExp, (m: RegExpMatchArray) => string][] = [
  [/^\/api\/v1\/scenario$/, () => 'scenario.json'],
  [/^\/api\/v1\/state\/([^/?]+)$/, (m) => `state-${m[1]}.json`],
  [/^\/api\/v1\/hotspots\?layout=(rank|link|volume)$/, (m) => `hotspots-${m[1]}.json`],
  [/^\/api\/v1\/stations$/, () => 'stations.json'],
  [/^\/api\/v1\/stations\/([^/?]+)\/series$/, (m) => `station-series-${m[1]}.json`],
  [/^\/api\/v1\/stations\/([^/?]+)\/attribution$/, (m) => `station-attribution-${m[1]}.json`],
  [/^\/api\/v1\/siting$/, () => 'siting-accepted.json'],
  [/^\/api\/v1\/jobs\/[^/?]+$/, () => 'job-done.json'],
  [/^\/api\/v1\/solutions$/, () => 'solutions.json'],
  [/^\/api\/v1\/solutions\/(plan-\d+)\/impact$/, (m) => `impact-${m[1]}.json`],
  [
    /^\/api\/v1\/solutions\/(plan-1)\/impact\?road_lo=0&road_hi=\d+(\.\d+)?(e[+-]?\d+)?$/i,
    () => 'impact-plan-1-increases.json',
  ],
  [/^\/api\/v1\/schemas\/siting-request$/, () => 'siting-request-schema.json'],
];

export function loadFixture(name: string): unknown {
  return JSON.parse(readFileSync(join(FIXTURES, name), 'utf-8'));
}

export class FixtureTransport {
  calls: string[] = [];

  readonly fetcher: Fetcher = async (path) => {
    this.calls.push(path);
    for (const [pattern, toFile] of ROUTES) {
      const match = path.match(pattern);
      if (match) {
        return loadFixture(toFile(match));
      }
    }
    throw new Error(`no fixture recorded for ${path}`);
  };
}

/** Replace global fetch with a mine for the duration of a test body. */
export function banNetwork(): { calls: () => number; restore: () => void } {
  const original = globalThis.fetch;
  let count = 0;
  globalThis.fetch = (async () => {
    count += 1;
    throw new Error('network call attempted in fixture-replay mode');
  }) as typeof fetch;
  return {
    calls: () => count,
    restore: () => {
      globalThis.fetch = original;
    },
  };
}

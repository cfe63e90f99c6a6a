// Result view: the top candidate plans, each with a three-bar profile of
// investment, charging demand coverage and service time. Bars are scaled
// against the best value across the listed plans so the trade-offs read
// at a glance.

import * as d3 from 'd3';

import type { Solution } from '../types';

export interface ResultsOptions {
  active?: string | null;
  onSelect?: (solutionId: string) => void;
}

export function renderResults(
  container: HTMLElement,
  solutions: Solution[],
  options: ResultsOptions = {},
): void {
  const root = d3.select(container);
  root.selectAll('*').remove();

  if (solutions.length === 0) {
    root.append('div').attr('class', 'empty-note').text('no solutions yet');
    return;
  }

  const maxInvestment = Math.max(...solutions.map((s) => s.investment), 1e-9);
  const maxCoverage = Math.max(...solutions.map((s) => s.coverage), 1e-9);
  const maxService = Math.max(...solutions.map((s) => s.service_time), 1e-9);

  const cards = root
    .selectAll('div.solution-card')
    .data(solutions, (s) => (s as Solution).id)
    .join('div')
    .attr('class', (s) =>
      s.id === options.active ? 'solution-card active' : 'solution-card',
    )
    .attr('data-solution', (s) => s.id)
    .on('click', (_event, s) => options.onSelect?.(s.id));

  cards
    .append('div')
    .attr('class', 'solution-title')
    .text((s, i) => `Plan ${i + 1} (${s.id})`);

  cards
    .append('div')
    .attr('class', 'solution-placements')
    .text((s) =>
      s.placements.map((p) => `node ${p.node} ×${p.chargers}`).join(', '),
    );

  const metrics = cards.append('div').attr('class', 'solution-metrics');
  const rows: [string, (s: Solution) => number, number, string][] = [
    ['investment', (s) => s.investment, maxInvestment, '#8d6e63'],
    ['coverage', (s) => s.coverage, maxCoverage, '#e8871e'],
    ['service', (s) => s.service_time, maxService, '#2e6fdb'],
  ];
  for (const [name, value, max, color] of rows) {
    const row = metrics.append('div').attr('class', `metric metric-${name}`);
    row.append('span').attr('class', 'metric-name').text(name);
    row
      .append('div')
      .attr('class', 'bar metric-bar')
      .style('background', color)
      .style('width', (s) => `${Math.round((100 * value(s as Solution)) / max)}px`)
      .attr('title', (s) => `${name}: ${value(s as Solution).toFixed(3)}`);
  }
}

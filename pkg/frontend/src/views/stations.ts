// Charging station table: size (pink bars) and mean coverage of charging
// demand (orange bars), sortable by either column, optional ascending
// order, rows highlighted when a hotspot selection contains their node.

import * as d3 from 'd3';

import type { StationRow } from '../types';

export type StationSort = 'size' | 'coverage';

export interface StationTableOptions {
  sortBy: StationSort;
  ascending: boolean;
  highlightNodes?: Set<number>;
  selectedStation?: string | null;
  onSelect?: (stationId: string) => void;
  onSortChange?: (sortBy: StationSort, ascending: boolean) => void;
}

export function renderStationTable(
  container: HTMLElement,
  rows: StationRow[],
  options: StationTableOptions,
): void {
  const root = d3.select(container);
  root.selectAll('*').remove();

  const controls = root.append('div').attr('class', 'station-controls');
  const select = controls
    .append('select')
    .attr('class', 'station-sort')
    .on('change', function () {
      options.onSortChange?.(this.value as StationSort, options.ascending);
    });
  select
    .selectAll('option')
    .data(['size', 'coverage'] as StationSort[])
    .join('option')
    .attr('value', (d) => d)
    .property('selected', (d) => d === options.sortBy)
    .text((d) => (d === 'size' ? 'Size' : 'Cover.'));
  const ascendLabel = controls.append('label').attr('class', 'ascend-toggle');
  ascendLabel
    .append('input')
    .attr('type', 'checkbox')
    .attr('class', 'ascend-checkbox')
    .property('checked', options.ascending)
    .on('change', function () {
      options.onSortChange?.(options.sortBy, this.checked);
    });
  ascendLabel.append('span').text('Ascend.');

  const key = (row: StationRow) => (options.sortBy === 'size' ? row.chargers : row.coverage);
  const sorted = [...rows].sort((a, b) =>
    options.ascending ? key(a) - key(b) : key(b) - key(a),
  );
  const maxChargers = Math.max(...rows.map((r) => r.chargers), 1);

  const table = root.append('table').attr('class', 'station-table');
  const header = table.append('thead').append('tr');
  for (const label of ['Station', 'Size', 'Cover.']) {
    header.append('th').text(label);
  }

  const body = table.append('tbody');
  const tr = body
    .selectAll('tr')
    .data(sorted, (d) => (d as StationRow).id)
    .join('tr')
    .attr('data-station', (d) => d.id)
    .attr('class', (d) => {
      const classes = ['station-row'];
      if (options.highlightNodes?.has(d.node)) classes.push('in-hotspot');
      if (d.id === options.selectedStation) classes.push('selected');
      if (!d.is_existing) classes.push('proposed');
      return classes.join(' ');
    })
    .on('click', (_event, d) => options.onSelect?.(d.id));

  tr.append('td').attr('class', 'station-name').text((d) => `${d.id} ${d.name}`);

  tr.append('td')
    .attr('class', 'station-size')
    .append('div')
    .attr('class', 'bar size-bar')
    .attr('title', (d) => `${d.chargers} chargers`)
    .style('width', (d) => `${Math.round((100 * d.chargers) / maxChargers)}px`)
    .style('background', '#e75480');

  tr.append('td')
    .attr('class', 'station-coverage')
    .append('div')
    .attr('class', 'bar coverage-bar')
    .attr('title', (d) => `coverage ${(100 * d.coverage).toFixed(1)}%`)
    .style('width', (d) => `${Math.round(100 * d.coverage)}px`)
    .style('background', '#e8871e');
}

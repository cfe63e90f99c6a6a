// Control panel: weight sliders plus the GA knobs (children per
// iteration, iterations, new station count, charger range). Validation
// runs client-side before anything leaves the browser; a busy form stays
// locked until the running job finishes.

import * as d3 from 'd3';

import { validateSitingForm } from '../schema';
import type { SitingForm } from '../types';

export interface ControlOptions {
  defaults?: Partial<SitingForm>;
  busy?: boolean;
  progress?: number;
  onSubmit: (form: SitingForm) => void;
}

const BASE: SitingForm = {
  weights: { w1: 1.0, w2: 1.0, w3: 1.0 },
  stations: 2,
  chargers: [6, 20],
  children: 24,
  iterations: 40,
  seed: 0,
};

export function renderControlPanel(container: HTMLElement, options: ControlOptions): void {
  const root = d3.select(container);
  root.selectAll('*').remove();
  const form = { ...BASE, ...options.defaults, weights: { ...BASE.weights, ...options.defaults?.weights } };

  const panel = root.append('div').attr('class', 'control-panel');

  const weightBox = panel.append('fieldset').attr('class', 'weights');
  weightBox.append('legend').text('Weight Information');
  const weightDefs: [keyof SitingForm['weights'], string][] = [
    ['w1', 'coverage'],
    ['w2', 'service time'],
    ['w3', 'investment'],
  ];
  for (const [key, label] of weightDefs) {
    const row = weightBox.append('label').attr('class', `weight-row weight-${key}`);
    row.append('span').text(label);
    row
      .append('input')
      .attr('type', 'range')
      .attr('min', 0)
      .attr('max', 2)
      .attr('step', 0.1)
      .attr('class', `weight-input weight-input-${key}`)
      .property('value', form.weights[key])
      .on('input', function () {
        form.weights[key] = Number(this.value);
        row.select('output').text(Number(this.value).toFixed(1));
      });
    row.append('output').text(form.weights[key].toFixed(1));
  }

  const numbers = panel.append('div').attr('class', 'ga-params');
  const numberDefs: [string, number, (v: number) => void][] = [
    ['stations', form.stations, (v) => (form.stations = v)],
    ['charger min', form.chargers[0], (v) => (form.chargers = [v, form.chargers[1]])],
    ['charger max', form.chargers[1], (v) => (form.chargers = [form.chargers[0], v])],
    ['children', form.children, (v) => (form.children = v)],
    ['iterations', form.iterations, (v) => (form.iterations = v)],
    ['seed', form.seed, (v) => (form.seed = v)],
  ];
  for (const [label, value, set] of numberDefs) {
    const row = numbers.append('label').attr('class', 'param-row');
    row.append('span').text(label);
    row
      .append('input')
      .attr('type', 'number')
      .attr('class', `param-input param-${label.replace(' ', '-')}`)
      .property('value', value)
      .on('input', function () {
        set(Number(this.value));
      });
  }

  const error = panel.append('div').attr('class', 'form-error').style('display', 'none');

  const button = panel
    .append('button')
    .attr('type', 'button')
    .attr('class', 'generate-button')
    .property('disabled', Boolean(options.busy))
    .text(options.busy ? 'Running…' : 'Generate Solutions')
    .on('click', () => {
      const checked = validateSitingForm(form);
      if (!checked.ok) {
        error.style('display', 'block').text(checked.message);
        return;
      }
      error.style('display', 'none').text('');
      options.onSubmit(checked.value);
    });

  if (options.busy) {
    const fraction = Math.min(Math.max(options.progress ?? 0, 0), 1);
    panel
      .append('div')
      .attr('class', 'job-progress')
      .append('div')
      .attr('class', 'job-progress-fill')
      .style('width', `${Math.round(100 * fraction)}%`);
    button.attr('title', `job ${Math.round(100 * fraction)}% done`);
  }
}

import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { renderStats } from '../src/render.js';
import { StatsScreen } from '../src/stats.js';
import { defaultState, fakeFetch, TOKEN } from './fake.js';

function setup() {
  const state = defaultState();
  const api = new ApiClient(TOKEN, fakeFetch(state));
  const screen = new StatsScreen(api, 'run1', 'ds1');
  return { state, screen };
}

describe('StatsScreen', () => {
  it('shows evaluation numbers verbatim from the API payload', async () => {
    const { screen } = setup();
    await screen.load();
    expect(screen.report).toMatchObject({ tp: 0, fp: 0, fn: 2, unjudged: 1 });
    const html = renderStats(screen);
    expect(html).toContain('1.000'); // precision, straight from the payload
    expect(html).toContain('0.500'); // recall
    expect(html).toContain('0.660'); // f1
  });

  it('renders one sweep row per threshold the API returned', async () => {
    const { screen } = setup();
    await screen.load();
    expect(screen.sweep.map((r) => r.threshold)).toEqual([0.8, 0.9]);
    const html = renderStats(screen);
    expect(html).toContain('0.800');
    expect(html).toContain('0.900');
  });

  it('renders the feature table', async () => {
    const { screen } = setup();
    await screen.load();
    const html = renderStats(screen);
    expect(html).toContain('name');
    expect(html).toContain('0.850'); // best threshold
    expect(html).toContain('yes'); // discriminative flag
  });

  it('reports API failures instead of showing stale numbers', async () => {
    const api = new ApiClient('wrong-token', fakeFetch(defaultState()));
    const screen = new StatsScreen(api, 'run1', 'ds1');
    await screen.load();
    expect(screen.report).toBeNull();
    expect(screen.error).toContain('token');
    expect(renderStats(screen)).toContain('token');
  });
});

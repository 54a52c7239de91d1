import { describe, expect, it } from 'vitest';

import { ApiClient, ApiError, ConflictError } from '../src/api.js';
import { defaultState, fakeFetch, TOKEN } from './fake.js';

describe('ApiClient', () => {
  it('sends the bearer token on every request', async () => {
    const state = defaultState();
    const client = new ApiClient(TOKEN, fakeFetch(state));
    await client.getGold();
    expect(state.requests).toHaveLength(1);
  });

  it('rejects with a 401 ApiError when the token is wrong', async () => {
    const client = new ApiClient('wrong', fakeFetch(defaultState()));
    await expect(client.getGold()).rejects.toMatchObject({ status: 401 });
    await expect(client.getGold()).rejects.toBeInstanceOf(ApiError);
  });

  it('maps 409 responses to ConflictError with the server detail', async () => {
    const state = defaultState();
    const client = new ApiClient(TOKEN, fakeFetch(state));
    await client.submitLabel('r1', 'r2', 'same');
    const err = await client.submitLabel('r1', 'r2', 'different').catch((e) => e);
    expect(err).toBeInstanceOf(ConflictError);
    expect(err.message).toContain('supersede');
  });

  it('passes pagination and filter parameters through to the server', async () => {
    const state = defaultState();
    const client = new ApiClient(TOKEN, fakeFetch(state));
    await client.getCandidates('run1', { offset: 5, limit: 7, unlabeledOnly: true });
    const url = state.requests[0].url;
    expect(url).toContain('offset=5');
    expect(url).toContain('limit=7');
    expect(url).toContain('unlabeled_only=true');
  });

  it('surfaces non-conflict errors with their detail message', async () => {
    const client = new ApiClient(TOKEN, fakeFetch(defaultState()));
    const err = await client.getRun('nope').catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(404);
  });
});

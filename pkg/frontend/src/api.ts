import {
  CandidatePage,
  ClassList,
  DatasetPage,
  DatasetSummary,
  EvalReport,
  FeatureRow,
  FusionRun,
  GoldRow,
  RunRecord,
  SweepRow,
  Verdict,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

/** 409 on label submission: the pair already carries a verdict. */
export class ConflictError extends ApiError {
  constructor(message: string) {
    super(409, message);
  }
}

export class ApiClient {
  constructor(
    private token: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
    private base: string = '',
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, {
        method,
        headers: {
          Authorization: `Bearer ${this.token}`,
          ...(body !== undefined ? { 'Content-Type': 'application/json' } : {}),
        },
        ...(body !== undefined ? { body: JSON.stringify(body) } : {}),
      });
    } catch (err) {
      throw new ApiError(0, `API unreachable: ${err}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = await response.json();
        if (payload && payload.detail) detail = String(payload.detail);
      } catch {
        // keep the status text
      }
      if (response.status === 409) throw new ConflictError(detail);
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listDatasets(): Promise<DatasetSummary[]> {
    return this.request('GET', '/api/datasets');
  }

  getDataset(id: string, offset = 0, limit = 50): Promise<DatasetPage> {
    return this.request('GET', `/api/datasets/${encodeURIComponent(id)}?offset=${offset}&limit=${limit}`);
  }

  listRuns(): Promise<RunRecord[]> {
    return this.request('GET', '/api/runs');
  }

  getRun(runId: string): Promise<RunRecord> {
    return this.request('GET', `/api/runs/${encodeURIComponent(runId)}`);
  }

  getCandidates(
    runId: string,
    opts: { offset?: number; limit?: number; unlabeledOnly?: boolean } = {},
  ): Promise<CandidatePage> {
    const params = new URLSearchParams({
      offset: String(opts.offset ?? 0),
      limit: String(opts.limit ?? 20),
      unlabeled_only: String(opts.unlabeledOnly ?? false),
    });
    return this.request('GET', `/api/runs/${encodeURIComponent(runId)}/candidates?${params}`);
  }

  submitLabel(idA: string, idB: string, verdict: Verdict, supersede = false): Promise<GoldRow> {
    return this.request('POST', '/api/labels', {
      idA,
      idB,
      verdict,
      labeler: 'webui',
      supersede,
    });
  }

  getGold(): Promise<GoldRow[]> {
    return this.request('GET', '/api/gold');
  }

  getEval(runId: string): Promise<EvalReport> {
    return this.request('GET', `/api/eval?run_id=${encodeURIComponent(runId)}`);
  }

  getSweep(runId: string, thresholds: number[]): Promise<SweepRow[]> {
    const ts = thresholds.join(',');
    return this.request('GET', `/api/eval/sweep?run_id=${encodeURIComponent(runId)}&thresholds=${ts}`);
  }

  getFeatureReport(datasetId: string): Promise<FeatureRow[]> {
    return this.request('GET', `/api/feature-report?dataset_id=${encodeURIComponent(datasetId)}`);
  }

  getClasses(runId: string, includeSingletons = false): Promise<ClassList> {
    return this.request(
      'GET',
      `/api/runs/${encodeURIComponent(runId)}/classes?include_singletons=${includeSingletons}`,
    );
  }

  createFusionRun(runId: string): Promise<{ fusionId: string; classCount: number }> {
    return this.request('POST', '/api/fusion-runs', { run_id: runId, config: {} });
  }

  getFusionRun(fusionId: string): Promise<FusionRun> {
    return this.request('GET', `/api/fusion-runs/${encodeURIComponent(fusionId)}`);
  }

  submitOverride(fusionId: string, fusedId: string, property: string, value: string): Promise<void> {
    return this.request('POST', `/api/fusion-runs/${encodeURIComponent(fusionId)}/overrides`, {
      fused_id: fusedId,
      property,
      value,
      operator: 'webui',
    });
  }
}

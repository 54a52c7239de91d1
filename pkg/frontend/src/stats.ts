import { ApiClient } from './api.js';
import { EvalReport, FeatureRow, SweepRow } from './types.js';

export const SWEEP_THRESHOLDS = [
  0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0,
];

/** Precision / recall / F-measure dashboard. Every number shown is taken
 * verbatim from an API response field; the screen does no scoring itself. */
export class StatsScreen {
  report: EvalReport | null = null;
  sweep: SweepRow[] = [];
  features: FeatureRow[] = [];
  error = '';

  constructor(private api: ApiClient, public runId: string, public datasetId: string) {}

  async load(): Promise<void> {
    this.error = '';
    try {
      [this.report, this.sweep, this.features] = await Promise.all([
        this.api.getEval(this.runId),
        this.api.getSweep(this.runId, SWEEP_THRESHOLDS),
        this.api.getFeatureReport(this.datasetId),
      ]);
    } catch (err) {
      this.report = null;
      this.sweep = [];
      this.features = [];
      this.error = (err as Error).message;
    }
  }
}

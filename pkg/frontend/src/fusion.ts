import { ApiClient } from './api.js';
import { FusedClass, FusionDecision, FusionRun } from './types.js';

/** Decision-log view over a fusion run. Overrides are restricted to the
 * original input values of the decision being overridden; free text is
 * rejected before it ever reaches the server. */
export class FusionScreen {
  fusion: FusionRun | null = null;
  status = '';

  constructor(private api: ApiClient, public runId: string) {}

  async start(): Promise<void> {
    const created = await this.api.createFusionRun(this.runId);
    await this.loadById(created.fusionId);
  }

  async loadById(fusionId: string): Promise<void> {
    this.fusion = await this.api.getFusionRun(fusionId);
  }

  async refresh(): Promise<void> {
    if (this.fusion !== null) await this.loadById(this.fusion.fusionId);
  }

  classes(): FusedClass[] {
    return this.fusion?.classes ?? [];
  }

  fusedClass(fusedId: string): FusedClass | undefined {
    return this.classes().find((c) => c.fusedId === fusedId);
  }

  decisionFor(fusedId: string, property: string): FusionDecision | undefined {
    return this.fusedClass(fusedId)?.decisions.find((d) => d.property === property);
  }

  /** The only values the override picker may offer. */
  overrideOptions(fusedId: string, property: string): string[] {
    return this.decisionFor(fusedId, property)?.inputs ?? [];
  }

  async submitOverride(fusedId: string, property: string, value: string): Promise<void> {
    if (this.fusion === null) return;
    if (!this.overrideOptions(fusedId, property).includes(value)) {
      this.status = `rejected: ${JSON.stringify(value)} is not one of the input values`;
      return;
    }
    await this.api.submitOverride(this.fusion.fusionId, fusedId, property, value);
    await this.refresh();
    this.status = `override recorded: ${property} = ${value}`;
  }
}

import { ApiClient } from './api.js';
import { EntityRecord } from './types.js';

/** Browser over the equivalence classes the engine reports for a run.
 * Singletons are hidden unless the operator asks for them; the optional
 * filter keeps only classes whose members carry a matching property value. */
export class ClassesScreen {
  classes: string[][] = [];
  includeSingletons = false;
  filterText = '';
  private entities = new Map<string, EntityRecord>();

  constructor(private api: ApiClient, public runId: string, public datasetId: string) {}

  async load(): Promise<void> {
    const [classList, page] = await Promise.all([
      this.api.getClasses(this.runId, this.includeSingletons),
      this.api.getDataset(this.datasetId, 0, 100_000),
    ]);
    this.classes = classList.classes;
    this.entities = new Map(page.entities.map((e) => [e.id, e]));
  }

  async toggleSingletons(): Promise<void> {
    this.includeSingletons = !this.includeSingletons;
    await this.load();
  }

  entity(id: string): EntityRecord | undefined {
    return this.entities.get(id);
  }

  private matches(memberId: string, needle: string): boolean {
    const entity = this.entities.get(memberId);
    if (entity === undefined) return false;
    for (const values of Object.values(entity.properties)) {
      for (const value of values) {
        if (value.raw.toLowerCase().includes(needle)) return true;
      }
    }
    return false;
  }

  /** Every class the API returned, minus those the property filter drops. */
  visibleClasses(): string[][] {
    const needle = this.filterText.trim().toLowerCase();
    if (needle === '') return this.classes;
    return this.classes.filter((cls) => cls.some((id) => this.matches(id, needle)));
  }
}

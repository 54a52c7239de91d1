import { ApiClient, ConflictError } from './api.js';
import { Candidate, Verdict } from './types.js';

export type LabelKey = 'y' | 'n' | 'r';

const KEY_TO_VERDICT: Record<LabelKey, Verdict> = {
  y: 'same',
  n: 'different',
  r: 'related',
};

/** A pair the server refused because it already carries a verdict. The
 * operator must explicitly confirm before the old label is superseded. */
export interface PendingConflict {
  candidate: Candidate;
  verdict: Verdict;
  message: string;
}

export class LabelingScreen {
  candidates: Candidate[] = [];
  total = 0;
  offset = 0;
  pageSize = 20;
  pendingConflict: PendingConflict | null = null;
  status = '';

  constructor(private api: ApiClient, public runId: string) {}

  /** Queue order comes from the server: unlabeled candidates, highest
   * similarity first. The screen never re-sorts. */
  async load(): Promise<void> {
    const page = await this.api.getCandidates(this.runId, {
      offset: this.offset,
      limit: this.pageSize,
      unlabeledOnly: true,
    });
    this.candidates = page.candidates;
    this.total = page.total;
  }

  async nextPage(): Promise<void> {
    if (this.offset + this.pageSize < this.total) {
      this.offset += this.pageSize;
      await this.load();
    }
  }

  async prevPage(): Promise<void> {
    if (this.offset > 0) {
      this.offset = Math.max(0, this.offset - this.pageSize);
      await this.load();
    }
  }

  current(): Candidate | null {
    return this.candidates[0] ?? null;
  }

  /** Label the candidate at the head of the queue. The pair is removed
   * optimistically; if the server rejects the label it is put back. */
  async labelCurrent(key: LabelKey): Promise<void> {
    const candidate = this.current();
    if (candidate === null) return;
    const verdict = KEY_TO_VERDICT[key];

    this.candidates = this.candidates.slice(1);
    this.total -= 1;
    try {
      await this.api.submitLabel(candidate.idA, candidate.idB, verdict);
      this.status = `${candidate.idA} / ${candidate.idB}: ${verdict}`;
    } catch (err) {
      this.candidates = [candidate, ...this.candidates];
      this.total += 1;
      if (err instanceof ConflictError) {
        this.pendingConflict = { candidate, verdict, message: err.message };
        this.status = '';
      } else {
        this.status = `label failed: ${(err as Error).message}`;
        throw err;
      }
    }
  }

  /** Re-submit the conflicted label with supersede set. */
  async confirmSupersede(): Promise<void> {
    const conflict = this.pendingConflict;
    if (conflict === null) return;
    this.pendingConflict = null;
    await this.api.submitLabel(
      conflict.candidate.idA,
      conflict.candidate.idB,
      conflict.verdict,
      true,
    );
    this.candidates = this.candidates.filter(
      (c) => !(c.idA === conflict.candidate.idA && c.idB === conflict.candidate.idB),
    );
    this.total -= 1;
    this.status = `${conflict.candidate.idA} / ${conflict.candidate.idB}: ${conflict.verdict} (superseded)`;
  }

  cancelSupersede(): void {
    this.pendingConflict = null;
    this.status = 'kept the existing label';
  }
}

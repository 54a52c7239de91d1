// Shapes of the JSON payloads the API returns. The UI renders these as-is;
// it never computes similarities or evaluation numbers on its own.

export type Verdict = 'same' | 'different' | 'related' | 'unlabeled';

export interface DatasetSummary {
  id: string;
  entityCount: number;
  sourceLabel: string;
}

export interface EntityRecord {
  id: string;
  type: string;
  properties: Record<string, { kind: string; raw: string }[]>;
}

export interface DatasetPage {
  id: string;
  entityCount: number;
  entities: EntityRecord[];
}

export interface RunRecord {
  runId: string;
  datasetIds: string[];
  state: 'pending' | 'running' | 'done' | 'failed';
  report: {
    candidateCount: number;
    scoredCount: number;
    acceptedCount: number;
    wallTimeSeconds: number;
  } | null;
  error: string | null;
  createdAt: number;
}

export interface Candidate {
  idA: string;
  idB: string;
  sim: number;
  perProperty: Record<string, number>;
  verdict: Verdict;
}

export interface CandidatePage {
  total: number;
  candidates: Candidate[];
}

export interface GoldRow {
  idA: string;
  idB: string;
  verdict: Verdict;
}

export interface EvalReport {
  tp: number;
  fp: number;
  fn: number;
  unjudged: number;
  precision: number;
  recall: number;
  f1: number;
}

export interface SweepRow extends EvalReport {
  threshold: number;
}

export interface FeatureRow {
  property: string;
  fillRate: number;
  distinctness: number;
  bestThreshold: number;
  standaloneF1: number;
  discriminative: boolean;
}

export interface ClassList {
  classes: string[][];
}

export interface FusionDecision {
  property: string;
  inputs: string[];
  function: string;
  outputs: string[];
  rationale: string;
}

export interface FusedClass {
  fusedId: string;
  memberIds: string[];
  type: string;
  properties: Record<string, string[]>;
  decisions: FusionDecision[];
  unresolved: string[];
}

export interface FusionRun {
  fusionId: string;
  runId: string;
  classes: FusedClass[];
  overrideCount: number;
}

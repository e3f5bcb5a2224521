// Document shapes mirroring the schemas published by the service under /schema.

export interface Anchor {
  artifact_id: string;
  start: number;
  end: number;
  label: string;
}

export type Significance = 'low' | 'medium' | 'high';
export type ChangeKind = 'created' | 'modified' | 'deleted';

export interface SummaryCard {
  order_index: number;
  path: string;
  kind: ChangeKind;
  title: string;
  significance: Significance;
  summary: string;
  anchors: Anchor[];
}

export interface Level1Document {
  version: number;
  session_id: string;
  snapshot_id: string;
  cards: SummaryCard[];
}

export interface SymbolRef {
  name: string;
  symbol_kind: string;
  artifact_id: string;
  span: { start: number; end: number };
  signature_text: string;
}

export interface Influence {
  artifact_id: string;
  path: string;
  matched_symbols: SymbolRef[];
  score: number;
  score_parts: Record<string, number>;
  evidence: Anchor[];
}

export interface ConventionFinding {
  convention: string;
  rationale: string;
  adherence: 'followed' | 'violated' | 'not_applicable';
  example_span: Anchor | null;
}

export interface ReasoningParagraph {
  text: string;
  anchor: Anchor | null;
}

export interface Alternative {
  title: string;
  description: string;
  tradeoffs: { aspect: string; comparison: string }[];
}

export interface Level2Document {
  version: number;
  session_id: string;
  order_index: number;
  path: string;
  influences: Influence[];
  conventions: ConventionFinding[];
  reasoning: ReasoningParagraph[];
  alternatives: Alternative[];
}

export interface ArtifactSlice {
  artifact_id: string;
  path: string;
  start: number;
  end: number;
  lines: string[];
}

export type StreamEvent =
  | { event: 'card'; data: SummaryCard }
  | { event: 'complete'; data: Level1Document }
  | { event: 'error'; data: { type: string; message: string } };

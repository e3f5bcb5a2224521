import type { Anchor, StreamEvent, SummaryCard } from './types.js';

// All panel state; reconstructable from (session_id, current_index,
// level2_open), which is exactly what the location hash carries.
export interface PanelState {
  sessionId: string;
  currentIndex: number;
  level2Open: boolean;
  loadedCards: SummaryCard[];
  streamDone: boolean;
  streamError: string | null;
  activeHighlight: Anchor | null;
}

export function createState(sessionId: string): PanelState {
  return {
    sessionId,
    currentIndex: 0,
    level2Open: false,
    loadedCards: [],
    streamDone: false,
    streamError: null,
    activeHighlight: null,
  };
}

export function applyStreamEvent(state: PanelState, event: StreamEvent): PanelState {
  switch (event.event) {
    case 'card':
      return { ...state, loadedCards: [...state.loadedCards, event.data] };
    case 'complete':
      return { ...state, streamDone: true, loadedCards: event.data.cards };
    case 'error':
      return { ...state, streamDone: true, streamError: event.data.message };
  }
}

export function clampIndex(state: PanelState, index: number): number {
  if (state.loadedCards.length === 0) return 0;
  return Math.min(Math.max(index, 0), state.loadedCards.length - 1);
}

// Selecting a different card closes Level 2: the view is per modification.
export function selectCard(state: PanelState, index: number): PanelState {
  const clamped = clampIndex(state, index);
  const changed = clamped !== state.currentIndex;
  return {
    ...state,
    currentIndex: clamped,
    level2Open: changed ? false : state.level2Open,
    activeHighlight: changed ? null : state.activeHighlight,
  };
}

export function stepCard(state: PanelState, delta: number): PanelState {
  return selectCard(state, state.currentIndex + delta);
}

export function openLevel2(state: PanelState): PanelState {
  return { ...state, level2Open: true };
}

export function closeLevel2(state: PanelState): PanelState {
  return { ...state, level2Open: false, activeHighlight: null };
}

export function setHighlight(state: PanelState, anchor: Anchor | null): PanelState {
  return { ...state, activeHighlight: anchor };
}

export function currentCard(state: PanelState): SummaryCard | null {
  return state.loadedCards[state.currentIndex] ?? null;
}

// -- deep linking -----------------------------------------------------------

export function toHash(state: PanelState): string {
  const level2 = state.level2Open ? '/level2' : '';
  return `#/session/${encodeURIComponent(state.sessionId)}/change/${state.currentIndex}${level2}`;
}

export interface DeepLink {
  sessionId: string;
  currentIndex: number;
  level2Open: boolean;
}

export function fromHash(hash: string): DeepLink | null {
  const match = /^#\/session\/([^/]+)\/change\/(\d+)(\/level2)?$/.exec(hash);
  if (!match) return null;
  return {
    sessionId: decodeURIComponent(match[1]),
    currentIndex: Number(match[2]),
    level2Open: match[3] !== undefined,
  };
}

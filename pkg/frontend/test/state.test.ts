import { describe, expect, it } from 'vitest';

import {
  applyStreamEvent,
  clampIndex,
  closeLevel2,
  createState,
  currentCard,
  fromHash,
  openLevel2,
  selectCard,
  stepCard,
  toHash,
} from '../src/state.js';
import type { Level1Document, SummaryCard } from '../src/types.js';

function card(index: number, path = `f${index}.py`): SummaryCard {
  return {
    order_index: index,
    path,
    kind: 'modified',
    title: `Update ${path}`,
    significance: 'low',
    summary: 'small change',
    anchors: [],
  };
}

describe('stream application', () => {
  it('appends cards in arrival order', () => {
    let state = createState('s');
    state = applyStreamEvent(state, { event: 'card', data: card(0) });
    state = applyStreamEvent(state, { event: 'card', data: card(1) });
    expect(state.loadedCards.map((c) => c.order_index)).toEqual([0, 1]);
    expect(state.streamDone).toBe(false);
  });

  it('complete replaces cards with the authoritative document', () => {
    let state = createState('s');
    state = applyStreamEvent(state, { event: 'card', data: card(0) });
    const doc: Level1Document = {
      version: 1,
      session_id: 's',
      snapshot_id: 'x',
      cards: [card(0), card(1)],
    };
    state = applyStreamEvent(state, { event: 'complete', data: doc });
    expect(state.streamDone).toBe(true);
    expect(state.loadedCards).toHaveLength(2);
  });

  it('error marks the stream done but keeps received cards', () => {
    let state = createState('s');
    state = applyStreamEvent(state, { event: 'card', data: card(0) });
    state = applyStreamEvent(state, {
      event: 'error',
      data: { type: 'ApplyError', message: 'boom' },
    });
    expect(state.streamError).toBe('boom');
    expect(state.loadedCards).toHaveLength(1);
  });
});

describe('navigation', () => {
  function loaded(): ReturnType<typeof createState> {
    let state = createState('s');
    for (let i = 0; i < 3; i++) state = applyStreamEvent(state, { event: 'card', data: card(i) });
    return state;
  }

  it('clamps at both boundaries without wrapping', () => {
    let state = loaded();
    state = stepCard(state, -1);
    expect(state.currentIndex).toBe(0);
    state = selectCard(state, 2);
    state = stepCard(state, 1);
    expect(state.currentIndex).toBe(2);
    expect(clampIndex(state, 99)).toBe(2);
    expect(clampIndex(state, -5)).toBe(0);
  });

  it('keeps index valid while cards stream in', () => {
    let state = createState('s');
    expect(currentCard(state)).toBeNull();
    state = applyStreamEvent(state, { event: 'card', data: card(0) });
    state = selectCard(state, 0);
    expect(currentCard(state)?.order_index).toBe(0);
  });

  it('switching cards closes level 2 and clears the highlight', () => {
    let state = loaded();
    state = openLevel2(state);
    state = selectCard(state, 1);
    expect(state.level2Open).toBe(false);
    expect(state.activeHighlight).toBeNull();
    state = openLevel2(state);
    state = selectCard(state, 1); // same card: stays open
    expect(state.level2Open).toBe(true);
    state = closeLevel2(state);
    expect(state.level2Open).toBe(false);
  });
});

describe('deep links', () => {
  it('hash round-trips the reconstructable triple', () => {
    let state = createState('sess-42');
    for (let i = 0; i < 3; i++) state = applyStreamEvent(state, { event: 'card', data: card(i) });
    state = selectCard(state, 2);
    state = openLevel2(state);
    const link = fromHash(toHash(state));
    expect(link).toEqual({ sessionId: 'sess-42', currentIndex: 2, level2Open: true });
  });

  it('rejects malformed hashes', () => {
    expect(fromHash('#/nonsense')).toBeNull();
    expect(fromHash('')).toBeNull();
    expect(fromHash('#/session/x/change/notanumber')).toBeNull();
  });

  it('encodes awkward session ids', () => {
    const state = createState('a/b c');
    const link = fromHash(toHash(state));
    expect(link?.sessionId).toBe('a/b c');
  });
});

import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { Panel, type PanelElements } from '../src/panel.js';
import type { Level2Document, SummaryCard } from '../src/types.js';

// ---------------------------------------------------------------------------
// Fake service: routes the panel's fetches against in-memory fixtures, logs
// every request, and lets tests drive the event stream chunk by chunk.
// ---------------------------------------------------------------------------

interface FakeWorld {
  sessionId: string;
  cards: SummaryCard[];
  level2: Record<number, Level2Document>;
  artifacts: Record<string, string[]>; // artifact_id -> file lines
  artifactPaths: Record<string, string>;
  failSlices?: boolean;
  failLevel2Once?: boolean;
}

interface RequestRecord {
  method: string;
  url: string;
}

function sseFrame(event: string, data: unknown): string {
  return `event: ${event}\ndata: ${JSON.stringify(data)}\n\n`;
}

function makeStream() {
  let controller!: ReadableStreamDefaultController<Uint8Array>;
  const stream = new ReadableStream<Uint8Array>({
    start(c) {
      controller = c;
    },
  });
  const encoder = new TextEncoder();
  return {
    stream,
    push(text: string) {
      controller.enqueue(encoder.encode(text));
    },
    close() {
      controller.close();
    },
  };
}

function fakeService(world: FakeWorld) {
  const requests: RequestRecord[] = [];
  const feed = makeStream();

  const fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? 'GET';
    requests.push({ method, url });
    const json = (body: unknown, status = 200) =>
      new Response(JSON.stringify(body), {
        status,
        headers: { 'content-type': 'application/json' },
      });

    if (url.endsWith('/events')) {
      return new Response(feed.stream, {
        status: 200,
        headers: { 'content-type': 'text/event-stream' },
      });
    }
    const level2Match = /\/changes\/(\d+)\/level2$/.exec(url);
    if (level2Match && method === 'POST') {
      if (world.failLevel2Once) {
        world.failLevel2Once = false;
        return json({ error: { type: 'GenerationError', message: 'backend exploded' } }, 500);
      }
      const doc = world.level2[Number(level2Match[1])];
      if (!doc) return json({ error: { type: 'RangeError', message: 'no such change' } }, 400);
      return json(doc);
    }
    const sliceMatch = /\/artifacts\/([^/?]+)\?start=(\d+)&end=(\d+)$/.exec(url);
    if (sliceMatch) {
      if (world.failSlices) {
        return json({ error: { type: 'NotFound', message: 'gone' } }, 404);
      }
      const [, artifactId, startText, endText] = sliceMatch;
      const lines = world.artifacts[artifactId];
      const start = Number(startText);
      const end = Number(endText);
      if (!lines) return json({ error: { type: 'NotFound', message: 'unknown' } }, 404);
      if (start < 1 || end > lines.length)
        return json({ error: { type: 'RangeError', message: 'bad range' } }, 400);
      return json({
        artifact_id: artifactId,
        path: world.artifactPaths[artifactId] ?? 'unknown',
        start,
        end,
        lines: lines.slice(start - 1, end),
      });
    }
    if (/\/sessions\/[^/]+$/.exec(url)) {
      return json({ status: 'level1_ready', cards: world.cards.length });
    }
    return json({ error: { type: 'NotFound', message: `no route for ${url}` } }, 404);
  };

  return { requests, feed, fetchImpl };
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

const MAIN_ID = 'aaaa000011112222';
const HELPER_ID = 'bbbb333344445555';
const GONE_ID = 'cccc666677778888';

function fixtureWorld(): FakeWorld {
  const cards: SummaryCard[] = [
    {
      order_index: 0,
      path: 'app/main.py',
      kind: 'modified',
      title: 'Update app/main.py',
      significance: 'medium',
      summary: 'Adds a stop helper.',
      anchors: [
        { artifact_id: MAIN_ID, start: 2, end: 4, label: 'hunk 1' },
        { artifact_id: MAIN_ID, start: 7, end: 8, label: 'hunk 2' },
      ],
    },
    {
      order_index: 1,
      path: 'app/old.py',
      kind: 'deleted',
      title: 'Delete app/old.py',
      significance: 'low',
      summary: 'Removes the old module.',
      anchors: [{ artifact_id: GONE_ID, start: 1, end: 2, label: 'removed content' }],
    },
  ];
  const level2: Record<number, Level2Document> = {
    0: {
      version: 1,
      session_id: 'sess-1',
      order_index: 0,
      path: 'app/main.py',
      influences: [
        {
          artifact_id: HELPER_ID,
          path: 'app/helpers.py',
          matched_symbols: [],
          score: 0.55,
          score_parts: {
            identifier_overlap: 0.9,
            reference_link: 0,
            path_proximity: 1,
            doc_mention: 0,
          },
          evidence: [{ artifact_id: HELPER_ID, start: 3, end: 5, label: 'definition of helper' }],
        },
      ],
      conventions: [
        {
          convention: 'naming style',
          rationale: '90.0% of repository identifiers use snake naming',
          adherence: 'followed',
          example_span: { artifact_id: MAIN_ID, start: 7, end: 7, label: 'conforming identifier' },
        },
      ],
      reasoning: [
        { text: 'The file was modified to add a stop helper.', anchor: null },
        {
          text: 'Hunk 1 inserts 3 lines.',
          anchor: { artifact_id: MAIN_ID, start: 2, end: 4, label: 'hunk 1' },
        },
      ],
      alternatives: [
        {
          title: 'Consider a different decomposition',
          description: 'Could inline the helper at its only call site.',
          tradeoffs: [{ aspect: 'cohesion', comparison: 'helper isolates behavior' }],
        },
      ],
    },
    1: {
      version: 1,
      session_id: 'sess-1',
      order_index: 1,
      path: 'app/old.py',
      influences: [],
      conventions: [],
      reasoning: [{ text: 'The file was deleted.', anchor: null }],
      alternatives: [
        {
          title: 'Deprecate instead of deleting',
          description: 'Keep a stub emitting a warning.',
          tradeoffs: [{ aspect: 'compatibility', comparison: 'stub keeps imports working' }],
        },
      ],
    },
  };
  return {
    sessionId: 'sess-1',
    cards,
    level2,
    artifacts: {
      [MAIN_ID]: ['import x', 'def run():', '    start()', '    stop()', '', 'VALUE = 1', 'def stop_app():', '    stop()'],
      [HELPER_ID]: ['# helpers', '', 'def helper():', '    x = 1', '    return x'],
      [GONE_ID]: ['old_one = 1', 'old_two = 2'],
    },
    artifactPaths: {
      [MAIN_ID]: 'app/main.py',
      [HELPER_ID]: 'app/helpers.py',
      [GONE_ID]: 'app/old.py',
    },
  };
}

function mountElements(): PanelElements {
  document.body.innerHTML =
    '<div id="nav"></div><div id="card"></div><div id="l2"></div><div id="ev"></div>';
  return {
    navigator: document.getElementById('nav')!,
    card: document.getElementById('card')!,
    level2: document.getElementById('l2')!,
    evidence: document.getElementById('ev')!,
  };
}

async function until(predicate: () => boolean, timeoutMs = 2000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!predicate()) {
    if (Date.now() > deadline) throw new Error('condition never became true');
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
}

function completeDoc(world: FakeWorld) {
  return { version: 1, session_id: world.sessionId, snapshot_id: 'snap', cards: world.cards };
}

async function startedPanel(world = fixtureWorld()) {
  const service = fakeService(world);
  const elements = mountElements();
  const api = new ApiClient('', service.fetchImpl);
  const panel = new Panel(api, elements, world.sessionId);
  const running = panel.start();
  for (const card of world.cards) service.feed.push(sseFrame('card', card));
  service.feed.push(sseFrame('complete', completeDoc(world)));
  service.feed.close();
  await running;
  return { panel, elements, service, world };
}

const level2Requests = (service: { requests: RequestRecord[] }) =>
  service.requests.filter((r) => r.method === 'POST' && r.url.includes('/level2'));

// ---------------------------------------------------------------------------
// Streamed navigator
// ---------------------------------------------------------------------------

describe('navigator streaming', () => {
  it('entries appear incrementally and in order under a throttled stream', async () => {
    const world = fixtureWorld();
    const service = fakeService(world);
    const elements = mountElements();
    const panel = new Panel(new ApiClient('', service.fetchImpl), elements, world.sessionId);
    const running = panel.start();

    const entryPaths = () =>
      Array.from(elements.navigator.querySelectorAll('.nav-entry-path')).map(
        (node) => node.textContent,
      );

    service.feed.push(sseFrame('card', world.cards[0]));
    await until(() => entryPaths().length === 1);
    expect(entryPaths()).toEqual(['app/main.py']);

    service.feed.push(sseFrame('card', world.cards[1]));
    await until(() => entryPaths().length === 2);
    expect(entryPaths()).toEqual(['app/main.py', 'app/old.py']);

    service.feed.push(sseFrame('complete', completeDoc(world)));
    service.feed.close();
    await running;
    expect(entryPaths()).toEqual(['app/main.py', 'app/old.py']);
    expect(elements.navigator.querySelector('.nav-entry.current')?.textContent).toContain(
      'app/main.py',
    );
  });

  it('a stream error shows a banner but received cards stay navigable', async () => {
    const world = fixtureWorld();
    const service = fakeService(world);
    const elements = mountElements();
    const panel = new Panel(new ApiClient('', service.fetchImpl), elements, world.sessionId);
    const running = panel.start();

    service.feed.push(sseFrame('card', world.cards[0]));
    service.feed.push(sseFrame('error', { type: 'ApplyError', message: 'hunk mismatch' }));
    service.feed.close();
    await running;

    expect(elements.navigator.querySelector('.stream-error-banner')?.textContent).toContain(
      'hunk mismatch',
    );
    expect(elements.navigator.querySelectorAll('.nav-entry')).toHaveLength(1);
    expect(elements.card.querySelector('.card-title')?.textContent).toBe('Update app/main.py');
  });

  it('prev/next clamp at the boundaries without wrapping', async () => {
    const { panel } = await startedPanel();
    await panel.step(-1);
    expect(panel.state.currentIndex).toBe(0);
    await panel.step(1);
    await panel.step(1);
    await panel.step(1);
    expect(panel.state.currentIndex).toBe(1);
  });
});

// ---------------------------------------------------------------------------
// Card view and highlight fidelity
// ---------------------------------------------------------------------------

describe('card view', () => {
  it('highlighted line set equals the card anchors exactly', async () => {
    const { elements, world } = await startedPanel();
    const highlighted = Array.from(
      elements.card.querySelectorAll('.code-line[data-highlighted="true"]'),
    ).map((node) => Number((node as HTMLElement).dataset.line));
    const expected: number[] = [];
    for (const anchor of world.cards[0].anchors) {
      for (let line = anchor.start; line <= anchor.end; line++) expected.push(line);
    }
    expect(highlighted).toEqual(expected);
    // And the text matches the artifact contents line for line.
    const texts = Array.from(elements.card.querySelectorAll('.line-text')).map(
      (n) => n.textContent,
    );
    expect(texts).toEqual([
      ...world.artifacts[MAIN_ID].slice(1, 4),
      ...world.artifacts[MAIN_ID].slice(6, 8),
    ]);
  });

  it('deleted card previews the pre-image with deletion styling', async () => {
    const { panel, elements } = await startedPanel();
    await panel.select(1);
    expect(elements.card.querySelector('.card-preview')?.classList.contains('deleted-file')).toBe(
      true,
    );
    const lines = Array.from(elements.card.querySelectorAll('.line-text')).map(
      (n) => n.textContent,
    );
    expect(lines).toEqual(['old_one = 1', 'old_two = 2']);
  });

  it('slice failure renders a placeholder with a retry affordance', async () => {
    const world = fixtureWorld();
    world.failSlices = true;
    const { elements, world: liveWorld } = await startedPanel(world);
    expect(elements.card.querySelector('.slice-placeholder')).not.toBeNull();
    const retry = elements.card.querySelector('.slice-retry') as HTMLButtonElement;
    expect(retry).not.toBeNull();
    liveWorld.failSlices = false;
    retry.click();
    await until(() => elements.card.querySelector('.code-line') !== null);
  });

  it('selecting a navigator entry swaps the card view', async () => {
    const { elements } = await startedPanel();
    const second = elements.navigator.querySelectorAll('.nav-entry-button')[1] as HTMLButtonElement;
    second.click();
    await until(
      () => elements.card.querySelector('.card-title')?.textContent === 'Delete app/old.py',
    );
  });
});

// ---------------------------------------------------------------------------
// Level 2: laziness, sections, errors
// ---------------------------------------------------------------------------

describe('level 2', () => {
  it('never requests level 2 before the trigger click, exactly once after', async () => {
    const { elements, service } = await startedPanel();
    expect(level2Requests(service)).toHaveLength(0);

    const trigger = elements.card.querySelector('.level2-trigger') as HTMLButtonElement;
    trigger.click();
    await until(() => elements.level2.querySelector('.level2-section') !== null);
    expect(level2Requests(service)).toHaveLength(1);

    // Re-opening the same card reuses the client cache: still one request.
    const panelSections = elements.level2.querySelectorAll('.level2-section');
    expect(panelSections.length).toBeGreaterThan(0);
    expect(level2Requests(service)).toHaveLength(1);
  });

  it('renders the four sections in fixed order', async () => {
    const { panel, elements } = await startedPanel();
    await panel.requestLevel2();
    const headers = Array.from(elements.level2.querySelectorAll('.level2-section h3')).map(
      (node) => node.textContent,
    );
    expect(headers).toEqual([
      'Codebase Influences',
      'Coding Conventions',
      'Implementation Reasoning',
      'Alternative Implementations',
    ]);
  });

  it('zero influences shows the empty state while other sections render', async () => {
    const { panel, elements } = await startedPanel();
    await panel.select(1);
    await panel.requestLevel2();
    expect(elements.level2.querySelector('.empty-state')?.textContent).toBe('no influences found');
    expect(elements.level2.querySelectorAll('.level2-section')).toHaveLength(4);
    expect(elements.level2.textContent).toContain('Deprecate instead of deleting');
  });

  it('clicking an influence hyperlink fetches and highlights the slice exactly', async () => {
    const { panel, elements, world, service } = await startedPanel();
    await panel.requestLevel2();
    const link = elements.level2.querySelector('.influence-link') as HTMLAnchorElement;
    link.click();
    await until(() => elements.evidence.querySelector('.code-line') !== null);

    const anchor = world.level2[0].influences[0].evidence[0];
    const highlighted = Array.from(
      elements.evidence.querySelectorAll('.code-line[data-highlighted="true"]'),
    ).map((node) => Number((node as HTMLElement).dataset.line));
    const expected = [];
    for (let line = anchor.start; line <= anchor.end; line++) expected.push(line);
    expect(highlighted).toEqual(expected);
    expect(
      service.requests.some((r) => r.url.includes(`/artifacts/${HELPER_ID}?start=3&end=5`)),
    ).toBe(true);
  });

  it('a generation failure shows a section-level error with retry', async () => {
    const world = fixtureWorld();
    world.failLevel2Once = true;
    const { panel, elements, service } = await startedPanel(world);
    await panel.requestLevel2();
    expect(elements.level2.querySelector('.level2-error')?.textContent).toContain(
      'backend exploded',
    );
    const retry = elements.level2.querySelector('.level2-retry') as HTMLButtonElement;
    retry.click();
    await until(() => elements.level2.querySelector('.level2-section') !== null);
    expect(level2Requests(service)).toHaveLength(2);
  });

  it('level2_open survives only while the card matches (deep-link invariant)', async () => {
    const { panel } = await startedPanel();
    await panel.requestLevel2();
    expect(panel.state.level2Open).toBe(true);
    await panel.select(1);
    expect(panel.state.level2Open).toBe(false);
  });
});

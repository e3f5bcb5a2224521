import type {
  Anchor,
  ArtifactSlice,
  ConventionFinding,
  Influence,
  Level2Document,
  SummaryCard,
} from './types.js';
import type { PanelState } from './state.js';

type Handler = () => void;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

// -- navigator ---------------------------------------------------------------

export interface NavigatorHandlers {
  onSelect: (index: number) => void;
  onPrev: Handler;
  onNext: Handler;
}

// Stepper over the modification cards. Entries appear as stream events
// arrive; the current entry is marked; prev/next clamp at the ends.
export function renderNavigator(
  container: HTMLElement,
  state: PanelState,
  handlers: NavigatorHandlers,
): void {
  container.replaceChildren();
  const controls = el('div', 'nav-controls');
  const prev = el('button', 'nav-prev', 'Prev');
  prev.addEventListener('click', handlers.onPrev);
  const position = el(
    'span',
    'nav-position',
    state.loadedCards.length
      ? `${state.currentIndex + 1} / ${state.loadedCards.length}${state.streamDone ? '' : '…'}`
      : state.streamDone
        ? 'no modifications'
        : 'loading…',
  );
  const next = el('button', 'nav-next', 'Next');
  next.addEventListener('click', handlers.onNext);
  controls.append(prev, position, next);
  container.append(controls);

  if (state.streamError !== null) {
    const banner = el('div', 'stream-error-banner');
    banner.setAttribute('role', 'alert');
    banner.textContent = `Stream error: ${state.streamError}`;
    container.append(banner);
  }

  const list = el('ol', 'nav-entries');
  state.loadedCards.forEach((card, index) => {
    const entry = el('li', 'nav-entry');
    entry.dataset.index = String(index);
    if (index === state.currentIndex) entry.classList.add('current');
    const button = el('button', 'nav-entry-button');
    button.append(
      el('span', `kind kind-${card.kind}`, card.kind),
      el('span', 'nav-entry-path', card.path),
    );
    button.addEventListener('click', () => handlers.onSelect(index));
    entry.append(button);
    list.append(entry);
  });
  container.append(list);
}

// -- card view ----------------------------------------------------------------

export interface SliceResult {
  anchor: Anchor;
  slice: ArtifactSlice | null; // null -> fetch failed, offer retry
}

export interface CardHandlers {
  onLevel2: Handler;
  onRetrySlice: (anchor: Anchor) => void;
}

function renderSliceBlock(result: SliceResult, deleted: boolean, onRetry: CardHandlers['onRetrySlice']): HTMLElement {
  const block = el('div', 'preview-block');
  if (deleted) block.classList.add('deleted');
  if (result.anchor.label) block.append(el('div', 'anchor-label', result.anchor.label));
  if (result.slice === null) {
    const placeholder = el('div', 'slice-placeholder', 'preview unavailable');
    const retry = el('button', 'slice-retry', 'Retry');
    retry.addEventListener('click', () => onRetry(result.anchor));
    placeholder.append(retry);
    block.append(placeholder);
    return block;
  }
  const code = el('pre', 'code-preview');
  result.slice.lines.forEach((line, offset) => {
    const row = el('div', 'code-line');
    const lineNo = result.slice!.start + offset;
    row.dataset.line = String(lineNo);
    row.dataset.highlighted = 'true';
    row.append(el('span', 'line-no', String(lineNo)), el('span', 'line-text', line));
    code.append(row);
  });
  block.append(code);
  return block;
}

export function renderCard(
  container: HTMLElement,
  card: SummaryCard,
  slices: SliceResult[],
  level2Open: boolean,
  handlers: CardHandlers,
): void {
  container.replaceChildren();
  const header = el('div', 'card-header');
  header.append(
    el('h2', 'card-title', card.title),
    el('span', `significance-badge significance-${card.significance}`, card.significance),
  );
  container.append(header, el('p', 'card-summary', card.summary));

  const preview = el('div', 'card-preview');
  if (card.kind === 'deleted') preview.classList.add('deleted-file');
  if (slices.length === 0) {
    preview.append(el('div', 'empty-preview', 'no preview for this change'));
  }
  for (const result of slices) {
    preview.append(renderSliceBlock(result, card.kind === 'deleted', handlers.onRetrySlice));
  }
  container.append(preview);

  if (!level2Open) {
    const trigger = el('button', 'level2-trigger', 'Why was it done this way?');
    trigger.addEventListener('click', handlers.onLevel2);
    container.append(trigger);
  }
}

// -- level 2 view ---------------------------------------------------------------

export interface Level2Handlers {
  onEvidenceClick: (anchor: Anchor) => void;
  onRetry: Handler;
}

function renderInfluences(
  doc: Level2Document,
  handlers: Level2Handlers,
): HTMLElement {
  const section = el('section', 'level2-section influences');
  section.append(el('h3', undefined, 'Codebase Influences'));
  if (doc.influences.length === 0) {
    section.append(el('p', 'empty-state', 'no influences found'));
    return section;
  }
  const list = el('ul', 'influence-list');
  for (const influence of doc.influences) {
    list.append(renderInfluenceEntry(influence, handlers));
  }
  section.append(list);
  return section;
}

function renderInfluenceEntry(influence: Influence, handlers: Level2Handlers): HTMLElement {
  const entry = el('li', 'influence-entry');
  const link = el('a', 'influence-link', influence.path);
  link.href = '#';
  const primary = influence.evidence[0];
  link.addEventListener('click', (event) => {
    event.preventDefault();
    if (primary) handlers.onEvidenceClick(primary);
  });
  entry.append(
    link,
    el('span', 'influence-score', influence.score.toFixed(3)),
  );
  const evidence = el('ul', 'evidence-list');
  for (const anchor of influence.evidence) {
    const item = el('li', 'evidence-item');
    const anchorLink = el(
      'a',
      'evidence-link',
      `${anchor.label || 'evidence'} (${anchor.start}–${anchor.end})`,
    );
    anchorLink.href = '#';
    anchorLink.addEventListener('click', (event) => {
      event.preventDefault();
      handlers.onEvidenceClick(anchor);
    });
    item.append(anchorLink);
    evidence.append(item);
  }
  entry.append(evidence);
  return entry;
}

function renderConventions(findings: ConventionFinding[]): HTMLElement {
  const section = el('section', 'level2-section conventions');
  section.append(el('h3', undefined, 'Coding Conventions'));
  const list = el('ul', 'convention-list');
  for (const finding of findings) {
    const item = el('li', `convention adherence-${finding.adherence}`);
    item.append(
      el('span', 'convention-name', finding.convention),
      el('span', 'adherence-chip', finding.adherence.replace('_', ' ')),
      el('p', 'convention-rationale', finding.rationale),
    );
    list.append(item);
  }
  section.append(list);
  return section;
}

function renderReasoning(doc: Level2Document, handlers: Level2Handlers): HTMLElement {
  const section = el('section', 'level2-section reasoning');
  section.append(el('h3', undefined, 'Implementation Reasoning'));
  for (const paragraph of doc.reasoning) {
    const p = el('p', 'reasoning-paragraph', paragraph.text);
    if (paragraph.anchor) {
      const anchor = paragraph.anchor;
      const link = el('a', 'reasoning-anchor', ` [lines ${anchor.start}–${anchor.end}]`);
      link.href = '#';
      link.addEventListener('click', (event) => {
        event.preventDefault();
        handlers.onEvidenceClick(anchor);
      });
      p.append(link);
    }
    section.append(p);
  }
  return section;
}

function renderAlternatives(doc: Level2Document): HTMLElement {
  const section = el('section', 'level2-section alternatives');
  section.append(el('h3', undefined, 'Alternative Implementations'));
  for (const alternative of doc.alternatives) {
    const block = el('div', 'alternative');
    block.append(
      el('h4', 'alternative-title', alternative.title),
      el('p', 'alternative-description', alternative.description),
    );
    const tradeoffs = el('ul', 'tradeoff-list');
    for (const tradeoff of alternative.tradeoffs) {
      const item = el('li', 'tradeoff');
      item.append(
        el('strong', undefined, tradeoff.aspect + ': '),
        document.createTextNode(tradeoff.comparison),
      );
      tradeoffs.append(item);
    }
    block.append(tradeoffs);
    section.append(block);
  }
  return section;
}

// Sections render in a fixed order: influences, conventions, reasoning,
// alternatives.
export function renderLevel2(
  container: HTMLElement,
  doc: Level2Document,
  handlers: Level2Handlers,
): void {
  container.replaceChildren();
  container.append(
    renderInfluences(doc, handlers),
    renderConventions(doc.conventions),
    renderReasoning(doc, handlers),
    renderAlternatives(doc),
  );
}

export function renderLevel2Error(container: HTMLElement, message: string, onRetry: Handler): void {
  container.replaceChildren();
  const box = el('div', 'level2-error');
  box.setAttribute('role', 'alert');
  box.append(el('p', undefined, `Level 2 analysis failed: ${message}`));
  const retry = el('button', 'level2-retry', 'Retry');
  retry.addEventListener('click', onRetry);
  box.append(retry);
  container.append(box);
}

// Evidence pane: the slice behind a clicked hyperlink, highlighted exactly.
export function renderEvidencePane(
  container: HTMLElement,
  slice: ArtifactSlice,
  anchor: Anchor,
): void {
  container.replaceChildren();
  const pane = el('div', 'evidence-pane');
  pane.append(el('div', 'evidence-path', `${slice.path}:${anchor.start}–${anchor.end}`));
  const code = el('pre', 'code-preview');
  slice.lines.forEach((line, offset) => {
    const row = el('div', 'code-line');
    const lineNo = slice.start + offset;
    row.dataset.line = String(lineNo);
    row.dataset.highlighted = 'true';
    row.append(el('span', 'line-no', String(lineNo)), el('span', 'line-text', line));
    code.append(row);
  });
  pane.append(code);
  container.append(pane);
}

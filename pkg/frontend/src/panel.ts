import { ApiClient } from './api.js';
import {
  applyStreamEvent,
  closeLevel2,
  createState,
  currentCard,
  openLevel2,
  selectCard,
  setHighlight,
  stepCard,
  toHash,
  type PanelState,
} from './state.js';
import type { Anchor, ArtifactSlice, Level2Document, SummaryCard } from './types.js';
import {
  renderCard,
  renderEvidencePane,
  renderLevel2,
  renderLevel2Error,
  renderNavigator,
  type SliceResult,
} from './view.js';

export interface PanelElements {
  navigator: HTMLElement;
  card: HTMLElement;
  level2: HTMLElement;
  evidence: HTMLElement;
}

// Controller: owns state transitions, talks to the service, re-renders.
// Level 2 is requested only from the trigger click (or a deep link that
// says it was already open); fetched documents are cached per card.
export class Panel {
  state: PanelState;
  private level2Cache = new Map<number, Level2Document>();
  private sliceCache = new Map<string, ArtifactSlice>();

  constructor(
    private readonly api: ApiClient,
    private readonly elements: PanelElements,
    sessionId: string,
    private readonly onHashChange: (hash: string) => void = () => {},
  ) {
    this.state = createState(sessionId);
  }

  async start(initialIndex = 0, level2Open = false): Promise<void> {
    await this.api.streamEvents(this.state.sessionId, (event) => {
      this.state = applyStreamEvent(this.state, event);
      if (event.event === 'card' && this.state.loadedCards.length - 1 === initialIndex) {
        this.state = selectCard(this.state, initialIndex);
      }
      this.renderNavigator();
    });
    this.state = selectCard(this.state, initialIndex);
    this.renderNavigator();
    await this.showCurrentCard();
    if (level2Open && currentCard(this.state) !== null) {
      await this.requestLevel2();
    }
  }

  // -- rendering ------------------------------------------------------------

  private renderNavigator(): void {
    renderNavigator(this.elements.navigator, this.state, {
      onSelect: (index) => void this.select(index),
      onPrev: () => void this.step(-1),
      onNext: () => void this.step(1),
    });
  }

  private clearSecondaryPanes(): void {
    this.elements.level2.replaceChildren();
    this.elements.evidence.replaceChildren();
  }

  private async showCurrentCard(): Promise<void> {
    const card = currentCard(this.state);
    if (card === null) {
      this.elements.card.replaceChildren();
      return;
    }
    const slices = await this.fetchSlices(card);
    renderCard(this.elements.card, card, slices, this.state.level2Open, {
      onLevel2: () => void this.requestLevel2(),
      onRetrySlice: () => void this.showCurrentCard(),
    });
    const first = this.elements.card.querySelector('.code-line');
    if (first && typeof (first as HTMLElement).scrollIntoView === 'function') {
      (first as HTMLElement).scrollIntoView();
    }
  }

  private async fetchSlices(card: SummaryCard): Promise<SliceResult[]> {
    const results: SliceResult[] = [];
    for (const anchor of card.anchors) {
      results.push({ anchor, slice: await this.fetchSlice(anchor) });
    }
    return results;
  }

  private async fetchSlice(anchor: Anchor): Promise<ArtifactSlice | null> {
    const key = `${anchor.artifact_id}:${anchor.start}:${anchor.end}`;
    const cached = this.sliceCache.get(key);
    if (cached) return cached;
    try {
      const slice = await this.api.artifactSlice(
        this.state.sessionId,
        anchor.artifact_id,
        anchor.start,
        anchor.end,
      );
      this.sliceCache.set(key, slice);
      return slice;
    } catch {
      return null;
    }
  }

  // -- interactions -----------------------------------------------------------

  async select(index: number): Promise<void> {
    this.state = selectCard(this.state, index);
    this.publishHash();
    this.renderNavigator();
    if (!this.state.level2Open) this.clearSecondaryPanes();
    await this.showCurrentCard();
  }

  async step(delta: number): Promise<void> {
    this.state = stepCard(this.state, delta);
    this.publishHash();
    this.renderNavigator();
    if (!this.state.level2Open) this.clearSecondaryPanes();
    await this.showCurrentCard();
  }

  async requestLevel2(): Promise<void> {
    const card = currentCard(this.state);
    if (card === null) return;
    this.state = openLevel2(this.state);
    this.publishHash();
    try {
      let doc = this.level2Cache.get(card.order_index);
      if (!doc) {
        doc = await this.api.level2(this.state.sessionId, card.order_index);
        this.level2Cache.set(card.order_index, doc);
      }
      renderLevel2(this.elements.level2, doc, {
        onEvidenceClick: (anchor) => void this.showEvidence(anchor),
        onRetry: () => void this.requestLevel2(),
      });
    } catch (error) {
      const message = error instanceof Error ? error.message : String(error);
      renderLevel2Error(this.elements.level2, message, () => void this.retryLevel2());
      this.state = closeLevel2(this.state);
      this.publishHash();
      return;
    }
    await this.showCurrentCard();
  }

  private async retryLevel2(): Promise<void> {
    const card = currentCard(this.state);
    if (card !== null) this.level2Cache.delete(card.order_index);
    await this.requestLevel2();
  }

  async showEvidence(anchor: Anchor): Promise<void> {
    const slice = await this.fetchSlice(anchor);
    if (slice === null) return;
    this.state = setHighlight(this.state, anchor);
    renderEvidencePane(this.elements.evidence, slice, anchor);
  }

  private publishHash(): void {
    this.onHashChange(toHash(this.state));
  }
}

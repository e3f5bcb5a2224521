import { ApiClient } from './api.js';
import { fromHash } from './state.js';
import { Panel, type PanelElements } from './panel.js';

function requireElement(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function boot(): Promise<void> {
  const elements: PanelElements = {
    navigator: requireElement('navigator'),
    card: requireElement('card'),
    level2: requireElement('level2'),
    evidence: requireElement('evidence'),
  };
  const link = fromHash(window.location.hash);
  const params = new URLSearchParams(window.location.search);
  const sessionId = link?.sessionId ?? params.get('session');
  if (!sessionId) {
    elements.card.textContent =
      'Open the panel with #/session/<id>/change/0 or ?session=<id>.';
    return;
  }
  const api = new ApiClient(params.get('api') ?? '');
  const panel = new Panel(api, elements, sessionId, (hash) => {
    window.history.replaceState(null, '', hash);
  });
  await panel.start(link?.currentIndex ?? 0, link?.level2Open ?? false);
}

void boot();

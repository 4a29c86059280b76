/**
 * Single-page adjudication UI. Two views: a session browser and an item
 * view that steps through the disagreement queue. All state is rebuilt from
 * API responses; refreshing the page loses nothing.
 */

import { ApiClient, ApiError } from './api.js';
import { splitAroundTarget } from './highlight.js';
import { classForKey, shortcutLegend } from './keyboard.js';
import {
  SessionState,
  beginSubmit,
  canSubmit,
  confirmSubmit,
  failSubmit,
  fromDetail,
  isLlmAnnotator,
  nextUnresolved,
  progressLabel,
  resolvedCount,
} from './state.js';
import type { ClassInfo, QueueItem, SessionSummary } from './types.js';

const api = new ApiClient();
const root = document.getElementById('app') as HTMLElement;
const banner = document.getElementById('banner') as HTMLElement;

let state: SessionState | null = null;
let resolver = localStorage.getItem('adjudicator') ?? 'adjudicator';

function showError(message: string): void {
  banner.textContent = message;
  banner.hidden = false;
}

function clearError(): void {
  banner.hidden = true;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = '',
  text = '',
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

// -- session browser ---------------------------------------------------------

async function renderSessionList(): Promise<void> {
  state = null;
  root.replaceChildren(el('p', 'muted', 'Loading sessions…'));
  let sessions: SessionSummary[];
  try {
    sessions = await api.listSessions();
    clearError();
  } catch (err) {
    showError(err instanceof ApiError ? err.message : String(err));
    root.replaceChildren(el('p', 'muted', 'Could not reach the adjudication API.'));
    return;
  }

  const view = el('div', 'session-list');
  view.appendChild(el('h2', '', 'Adjudication sessions'));
  if (sessions.length === 0) {
    view.appendChild(el('p', 'muted', 'No sessions are being served.'));
  }
  for (const session of sessions) {
    const row = el('button', 'session-row');
    row.appendChild(el('span', 'session-id', session.session_id));
    row.appendChild(el('span', 'schema-id', session.schema_id));
    row.appendChild(el('span', 'progress', progressLabel(session)));
    row.addEventListener('click', () => void openSession(session.session_id));
    view.appendChild(row);
  }
  root.replaceChildren(view);
}

// -- item view -----------------------------------------------------------------

async function openSession(sessionId: string): Promise<void> {
  try {
    state = fromDetail(await api.getSession(sessionId));
    clearError();
  } catch (err) {
    showError(err instanceof ApiError ? err.message : String(err));
    return;
  }
  renderItemView();
}

function renderItemView(): void {
  if (!state) return;
  const item = nextUnresolved(state);
  const view = el('div', 'item-view');

  const header = el('div', 'item-header');
  const back = el('button', 'back', '← Sessions');
  back.addEventListener('click', () => void renderSessionList());
  header.appendChild(back);
  header.appendChild(el('h2', '', state.detail.session_id));
  header.appendChild(
    el('span', 'progress', `${resolvedCount(state)}/${state.detail.queue.length} resolved`),
  );
  view.appendChild(header);

  if (item === null) {
    const done = el('div', 'done');
    done.appendChild(el('h3', '', 'All disagreements resolved'));
    done.appendChild(el('p', 'muted', 'The adjudicated labels can now be exported.'));
    view.appendChild(done);
    root.replaceChildren(view);
    return;
  }

  view.appendChild(renderContext(item));
  view.appendChild(renderLabels(item));
  view.appendChild(renderRationales(item));
  view.appendChild(renderPalette(item));
  root.replaceChildren(view);
}

function renderContext(item: QueueItem): HTMLElement {
  const section = el('section', 'context');
  section.appendChild(el('h3', '', item.context_id));
  const text = el('p', 'context-text');
  const [before, marker, after] = splitAroundTarget(item.text, item.target_label);
  text.appendChild(document.createTextNode(before));
  if (marker) {
    text.appendChild(el('mark', 'target-marker', marker));
  }
  text.appendChild(document.createTextNode(after));
  section.appendChild(text);
  if (item.target_label) {
    section.appendChild(el('p', 'target-ref', `Target: ${item.target_label}`));
  }
  return section;
}

function renderLabels(item: QueueItem): HTMLElement {
  const section = el('section', 'labels');
  section.appendChild(el('h4', '', 'Annotator labels'));
  for (const [annotator, label] of Object.entries(item.labels)) {
    const chip = el('span', isLlmAnnotator(annotator) ? 'chip chip-llm' : 'chip chip-human');
    chip.appendChild(el('span', 'chip-annotator', annotator));
    chip.appendChild(el('span', 'chip-label', label));
    section.appendChild(chip);
  }
  return section;
}

function renderRationales(item: QueueItem): HTMLElement {
  const section = el('section', 'rationales');
  const entries = Object.entries(item.rationales);
  if (entries.length === 0) {
    return section;
  }
  section.appendChild(el('h4', '', 'Rationales'));
  for (const [annotator, rationale] of entries) {
    const row = el('div', 'rationale');
    row.appendChild(el('span', 'rationale-annotator', annotator));
    row.appendChild(el('p', 'rationale-text', rationale));
    section.appendChild(row);
  }
  return section;
}

function renderPalette(item: QueueItem): HTMLElement {
  const section = el('section', 'palette');
  section.appendChild(el('h4', '', 'Resolve as'));
  const note = el('input', 'note');
  note.placeholder = 'Optional note (why this label)';
  const classes = state?.detail.classes ?? [];
  for (const cls of classes) {
    const button = el('button', 'class-button', `${cls.name} (${cls.code})`);
    button.title = cls.definition;
    button.addEventListener('click', () => void submit(item, cls, note.value));
    section.appendChild(button);
  }
  section.appendChild(note);
  section.appendChild(el('p', 'legend', shortcutLegend(classes)));
  return section;
}

async function submit(item: QueueItem, cls: ClassInfo, note: string): Promise<void> {
  if (!state || !canSubmit(state, item.context_id)) {
    return; // a POST for this item is already in flight
  }
  state = beginSubmit(state, item.context_id, cls.code, resolver, note);
  renderItemView(); // optimistic advance
  try {
    const body = await api.postResolution(state.detail.session_id, {
      context_id: item.context_id,
      label: cls.code,
      resolver,
      note,
    });
    state = confirmSubmit(state, body.resolution);
    clearError();
  } catch (err) {
    state = failSubmit(state, item.context_id);
    showError(err instanceof ApiError ? err.message : String(err));
  }
  renderItemView();
}

// -- keyboard shortcuts ----------------------------------------------------------

document.addEventListener('keydown', (event) => {
  if (event.target instanceof HTMLInputElement || event.target instanceof HTMLTextAreaElement) {
    return;
  }
  if (!state) return;
  const item = nextUnresolved(state);
  if (!item) return;
  const cls = classForKey(event.key, state.detail.classes);
  if (cls) {
    event.preventDefault();
    const note = root.querySelector<HTMLInputElement>('input.note');
    void submit(item, cls, note?.value ?? '');
  }
});

void renderSessionList();

/**
 * Session adjudication state. All fields are rebuilt from API responses, so
 * a page refresh loses nothing; the only transient piece is the in-flight
 * submission set used as a double-submit guard and for optimistic updates.
 */

import type { QueueItem, Resolution, SessionDetail, SessionSummary } from './types.js';

export interface SessionState {
  detail: SessionDetail;
  /** context_id -> effective resolution (latest wins). */
  resolutions: Map<string, Resolution>;
  /** context_ids with a POST in flight (double-submit guard). */
  pending: Set<string>;
}

export function fromDetail(detail: SessionDetail): SessionState {
  const resolutions = new Map<string, Resolution>();
  for (const resolution of detail.resolutions) {
    resolutions.set(resolution.context_id, resolution); // log order: newest last
  }
  return { detail, resolutions, pending: new Set() };
}

export function progressLabel(summary: SessionSummary): string {
  return `${summary.resolved}/${summary.total}`;
}

export function resolvedCount(state: SessionState): number {
  return state.detail.queue.filter((item) => state.resolutions.has(item.context_id)).length;
}

export function nextUnresolved(state: SessionState): QueueItem | null {
  for (const item of state.detail.queue) {
    if (!state.resolutions.has(item.context_id)) {
      return item;
    }
  }
  return null;
}

export function isDone(state: SessionState): boolean {
  return nextUnresolved(state) === null;
}

/**
 * True when a submission for this context may start. Blocks while a POST for
 * the same context is still in flight.
 */
export function canSubmit(state: SessionState, contextId: string): boolean {
  return !state.pending.has(contextId);
}

/** Mark a submission in flight and apply it optimistically. */
export function beginSubmit(
  state: SessionState,
  contextId: string,
  label: string,
  resolver: string,
  note = '',
): SessionState {
  const resolutions = new Map(state.resolutions);
  resolutions.set(contextId, { context_id: contextId, label, resolver, note, timestamp: '' });
  const pending = new Set(state.pending);
  pending.add(contextId);
  return { ...state, resolutions, pending };
}

/** Reconcile with the server's stored resolution. */
export function confirmSubmit(state: SessionState, resolution: Resolution): SessionState {
  const resolutions = new Map(state.resolutions);
  resolutions.set(resolution.context_id, resolution);
  const pending = new Set(state.pending);
  pending.delete(resolution.context_id);
  return { ...state, resolutions, pending };
}

/** Roll back an optimistic update after a failed POST. */
export function failSubmit(state: SessionState, contextId: string): SessionState {
  const resolutions = new Map(state.resolutions);
  resolutions.delete(contextId);
  const pending = new Set(state.pending);
  pending.delete(contextId);
  return { ...state, resolutions, pending };
}

/** Annotator keys are "Human:name" or "LLM:..." — used to style label chips. */
export function isLlmAnnotator(annotatorKey: string): boolean {
  return annotatorKey.startsWith('LLM:');
}

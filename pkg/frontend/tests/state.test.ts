import { describe, expect, it } from 'vitest';

import {
  beginSubmit,
  canSubmit,
  confirmSubmit,
  failSubmit,
  fromDetail,
  isDone,
  isLlmAnnotator,
  nextUnresolved,
  progressLabel,
  resolvedCount,
} from '../src/state.js';
import type { QueueItem, Resolution, SessionDetail } from '../src/types.js';

function item(contextId: string): QueueItem {
  return {
    context_id: contextId,
    target_label: 'Doe (2021)',
    text: 'Some sentence citing work (Doe, 2021).',
    labels: { 'Human:alice': 'BKG', 'LLM:mock#Full,EN#run1': 'EVS' },
    rationales: {},
  };
}

function resolution(contextId: string, label: string): Resolution {
  return { context_id: contextId, label, resolver: 'carol', note: '', timestamp: 't' };
}

function detail(queueIds: string[], resolutions: Resolution[] = []): SessionDetail {
  return {
    session_id: 's1',
    schema_id: 'purpose-5',
    total: queueIds.length,
    resolved: resolutions.length,
    classes: [
      { name: 'Background', code: 'BKG', definition: '' },
      { name: 'Evidence', code: 'EVS', definition: '' },
    ],
    queue: queueIds.map(item),
    resolutions,
  };
}

describe('fromDetail', () => {
  it('keeps only the latest resolution per context', () => {
    const state = fromDetail(
      detail(['c1'], [resolution('c1', 'BKG'), resolution('c1', 'EVS')]),
    );
    expect(state.resolutions.get('c1')?.label).toBe('EVS');
    expect(resolvedCount(state)).toBe(1);
  });
});

describe('progress', () => {
  it('formats resolved/total', () => {
    expect(progressLabel({ session_id: 's', schema_id: 'p', total: 8, resolved: 3 })).toBe('3/8');
  });

  it('walks the queue in order', () => {
    const state = fromDetail(detail(['c1', 'c2', 'c3'], [resolution('c1', 'BKG')]));
    expect(nextUnresolved(state)?.context_id).toBe('c2');
    expect(isDone(state)).toBe(false);
  });

  it('reports done when everything is resolved', () => {
    const state = fromDetail(
      detail(['c1', 'c2'], [resolution('c1', 'BKG'), resolution('c2', 'EVS')]),
    );
    expect(nextUnresolved(state)).toBeNull();
    expect(isDone(state)).toBe(true);
  });
});

describe('submission lifecycle', () => {
  it('guards against double-submit while a POST is in flight', () => {
    let state = fromDetail(detail(['c1', 'c2']));
    expect(canSubmit(state, 'c1')).toBe(true);
    state = beginSubmit(state, 'c1', 'BKG', 'carol');
    expect(canSubmit(state, 'c1')).toBe(false);
    expect(canSubmit(state, 'c2')).toBe(true);
  });

  it('advances optimistically and reconciles with the server', () => {
    let state = fromDetail(detail(['c1', 'c2']));
    state = beginSubmit(state, 'c1', 'BKG', 'carol');
    expect(nextUnresolved(state)?.context_id).toBe('c2'); // optimistic advance
    state = confirmSubmit(state, resolution('c1', 'BKG'));
    expect(canSubmit(state, 'c1')).toBe(true);
    expect(state.resolutions.get('c1')?.timestamp).toBe('t'); // server copy wins
  });

  it('rolls back a failed submission', () => {
    let state = fromDetail(detail(['c1']));
    state = beginSubmit(state, 'c1', 'BKG', 'carol');
    state = failSubmit(state, 'c1');
    expect(nextUnresolved(state)?.context_id).toBe('c1');
    expect(canSubmit(state, 'c1')).toBe(true);
    expect(resolvedCount(state)).toBe(0);
  });
});

describe('isLlmAnnotator', () => {
  it('distinguishes LLM keys from human keys', () => {
    expect(isLlmAnnotator('LLM:mock#Full,EN#run1')).toBe(true);
    expect(isLlmAnnotator('Human:alice')).toBe(false);
  });
});

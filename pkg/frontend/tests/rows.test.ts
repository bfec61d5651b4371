import { describe, expect, it } from 'vitest';

import { buildRows, validateProposal } from '../src/state.js';
import type { ContributionPayload, SentencePayload } from '../src/types.js';

function sentence(index: number, overrides: Partial<SentencePayload> = {}): SentencePayload {
  return {
    sentence_id: `vid:${index}`,
    video_id: 'vid',
    index,
    original_text: `Original sentence ${index}.`,
    current_translation: `Traducción ${index}.`,
    current_f1: 0.97,
    flagged: false,
    version: 1,
    ...overrides,
  };
}

function contribution(
  id: number,
  sentenceId: string,
  overrides: Partial<ContributionPayload> = {},
): ContributionPayload {
  return {
    contribution_id: id,
    sentence_id: sentenceId,
    user_id: 'alice',
    proposed_text: `Propuesta ${id}.`,
    submitted_at: `2026-01-01T00:00:0${id}`,
    round_trip_f1: null,
    state: 'pending',
    ...overrides,
  };
}

describe('buildRows', () => {
  it('mirrors the API flags without recomputing anything', () => {
    const rows = buildRows([
      sentence(0, { flagged: false }),
      sentence(1, { flagged: true, current_f1: 0.4 }),
      sentence(2, { flagged: false }),
    ]);
    expect(rows.map((r) => r.flagged)).toEqual([false, true, false]);
    expect(rows.filter((r) => r.flagged)).toHaveLength(1);
    expect(rows[1]!.currentF1).toBe(0.4);
  });

  it('keeps rows in sentence order regardless of payload order', () => {
    const rows = buildRows([sentence(2), sentence(0), sentence(1)]);
    expect(rows.map((r) => r.index)).toEqual([0, 1, 2]);
  });

  it('attaches the newest pending contribution and the newest state', () => {
    const rows = buildRows(
      [sentence(0)],
      [
        contribution(1, 'vid:0', { state: 'rejected', proposed_text: 'Vieja.' }),
        contribution(2, 'vid:0', { state: 'pending', proposed_text: 'Nueva.' }),
      ],
    );
    expect(rows[0]!.myPendingContribution).toBe('Nueva.');
    expect(rows[0]!.lastState).toBe('pending');
  });

  it('reports the newest state even when nothing is pending anymore', () => {
    const rows = buildRows(
      [sentence(0)],
      [
        contribution(1, 'vid:0', { state: 'superseded' }),
        contribution(2, 'vid:0', { state: 'accepted' }),
      ],
    );
    expect(rows[0]!.myPendingContribution).toBeUndefined();
    expect(rows[0]!.lastState).toBe('accepted');
  });

  it('ignores contributions for other sentences', () => {
    const rows = buildRows([sentence(0)], [contribution(1, 'vid:9')]);
    expect(rows[0]!.myPendingContribution).toBeUndefined();
    expect(rows[0]!.lastState).toBeUndefined();
  });
});

describe('validateProposal', () => {
  const row = buildRows([sentence(0, { current_translation: 'Texto actual.' })])[0]!;

  it('rejects empty and whitespace-only proposals', () => {
    expect(validateProposal(row, '')).toMatch(/before submitting/);
    expect(validateProposal(row, '   \n\t')).toMatch(/before submitting/);
  });

  it('rejects proposals equal to the current translation', () => {
    expect(validateProposal(row, 'Texto actual.')).toMatch(/matches the current translation/);
    expect(validateProposal(row, '  Texto actual.  ')).toMatch(/matches the current translation/);
  });

  it('accepts a real edit', () => {
    expect(validateProposal(row, 'Texto corregido.')).toBeNull();
  });
});

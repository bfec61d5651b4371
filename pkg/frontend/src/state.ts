/**
 * View-model construction and the correction-submission workflow.
 *
 * All functions here are pure or operate on passed-in collaborators, so the
 * DOM controller stays a thin shim and the behavior is testable with a
 * mocked API alone.
 */

import { ApiClient, ApiError } from './api.js';
import type { ContributionPayload, ReviewRow, SentencePayload } from './types.js';

/**
 * Merge the API's sentence records with the reviewer's own contributions
 * into display rows, in sentence order. Flags and scores pass through
 * untouched; the client never reclassifies.
 */
export function buildRows(
  sentences: SentencePayload[],
  myContributions: ContributionPayload[] = [],
): ReviewRow[] {
  const bySentence = new Map<string, ContributionPayload[]>();
  for (const c of myContributions) {
    const list = bySentence.get(c.sentence_id) ?? [];
    list.push(c);
    bySentence.set(c.sentence_id, list);
  }

  const rows = sentences.map((s): ReviewRow => {
    const mine = (bySentence.get(s.sentence_id) ?? []).slice().sort(newestLast);
    const newest = mine[mine.length - 1];
    const newestPending = [...mine].reverse().find((c) => c.state === 'pending');
    return {
      sentenceId: s.sentence_id,
      index: s.index,
      originalText: s.original_text,
      currentTranslation: s.current_translation,
      currentF1: s.current_f1,
      flagged: s.flagged,
      myPendingContribution: newestPending?.proposed_text,
      lastState: newest?.state,
    };
  });
  return rows.sort((a, b) => a.index - b.index);
}

function newestLast(a: ContributionPayload, b: ContributionPayload): number {
  if (a.submitted_at !== b.submitted_at) {
    return a.submitted_at < b.submitted_at ? -1 : 1;
  }
  return a.contribution_id - b.contribution_id;
}

/**
 * Client-side validation run before any request: empty and no-op proposals
 * never reach the API. Returns an inline message, or null when submittable.
 */
export function validateProposal(row: ReviewRow, text: string): string | null {
  const trimmed = text.trim();
  if (!trimmed) {
    return 'Enter a correction before submitting.';
  }
  if (trimmed === row.currentTranslation.trim()) {
    return 'The correction matches the current translation; nothing to submit.';
  }
  return null;
}

export type SubmitOutcome =
  | { kind: 'invalid'; sentenceId: string; message: string }
  | { kind: 'in-flight'; sentenceId: string }
  | { kind: 'accepted'; sentenceId: string; contribution: ContributionPayload }
  | { kind: 'failed'; sentenceId: string; message: string; network: boolean; retainedText: string };

/**
 * Run one correction submission end to end: validate, deduplicate against
 * in-flight requests for the same sentence, POST, and report the outcome.
 * The in-flight set is mutated for the duration of the request.
 */
export async function submitCorrection(
  api: ApiClient,
  row: ReviewRow,
  text: string,
  inFlight: Set<string>,
): Promise<SubmitOutcome> {
  const sentenceId = row.sentenceId;
  const message = validateProposal(row, text);
  if (message !== null) {
    return { kind: 'invalid', sentenceId, message };
  }
  if (inFlight.has(sentenceId)) {
    return { kind: 'in-flight', sentenceId };
  }
  inFlight.add(sentenceId);
  try {
    const contribution = await api.submitContribution(sentenceId, text.trim());
    return { kind: 'accepted', sentenceId, contribution };
  } catch (err) {
    const network = err instanceof ApiError && err.isNetwork;
    const detail = err instanceof Error ? err.message : String(err);
    return { kind: 'failed', sentenceId, message: detail, network, retainedText: text };
  } finally {
    inFlight.delete(sentenceId);
  }
}

/** Fold a submission outcome back into the row list (immutably). */
export function applyOutcome(rows: ReviewRow[], outcome: SubmitOutcome): ReviewRow[] {
  if (outcome.kind !== 'accepted') {
    return rows;
  }
  return rows.map((row) =>
    row.sentenceId === outcome.sentenceId
      ? {
          ...row,
          myPendingContribution: outcome.contribution.proposed_text,
          lastState: outcome.contribution.state,
        }
      : row,
  );
}

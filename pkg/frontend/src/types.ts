/**
 * Wire types for the /v1 contribution API and the client-side view model.
 * Field names on the *Payload types match the JSON exactly; the view model
 * uses camelCase like the rest of the client.
 */

export interface VideoSummary {
  video_id: string;
  title: string;
  source_language: string;
  target_language: string;
  subject: string;
  sentence_count: number;
  flagged_count: number;
  artifact_version: number;
}

export interface SentencePayload {
  sentence_id: string;
  video_id: string;
  index: number;
  original_text: string;
  current_translation: string;
  current_f1: number | null;
  flagged: boolean;
  version: number;
}

export type ContributionState = 'pending' | 'accepted' | 'rejected' | 'superseded';

export interface ContributionPayload {
  contribution_id: number;
  sentence_id: string;
  user_id: string;
  proposed_text: string;
  submitted_at: string;
  round_trip_f1: number | null;
  state: ContributionState;
}

/** Error envelope every non-2xx response carries. */
export interface ApiErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown>;
}

/**
 * One sentence as the reviewer sees it: the API's sentence record merged
 * with the reviewer's own contributions. The client never computes flags
 * or scores; both come straight from the payloads.
 */
export interface ReviewRow {
  sentenceId: string;
  index: number;
  originalText: string;
  currentTranslation: string;
  currentF1: number | null;
  flagged: boolean;
  /** Text of the reviewer's newest still-pending proposal, if any. */
  myPendingContribution?: string;
  /** State of the reviewer's newest contribution for this sentence. */
  lastState?: ContributionState;
}

export interface ClientConfig {
  baseUrl: string;
  token: string;
  /** Contribution states are re-fetched on this cadence. */
  pollIntervalMs: number;
}

export const DEFAULT_POLL_INTERVAL_MS = 30_000;

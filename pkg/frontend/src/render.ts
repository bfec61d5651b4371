/**
 * HTML renderers. Each view is a pure function from data to markup so the
 * snapshot tests can assert on strings without a browser; the controller
 * assigns the result to a container and wires events by delegation.
 */

import type { ReviewRow, VideoSummary } from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;');
}

/** First screen when no token is configured: nothing is fetched from here. */
export function renderTokenEntry(error?: string): string {
  return [
    '<section class="token-entry">',
    '  <h1>Sign in to review</h1>',
    '  <p>Paste the API base URL and your contributor token.</p>',
    error ? `  <p class="banner error">${escapeHtml(error)}</p>` : '',
    '  <form data-action="configure">',
    '    <label>API base URL <input name="baseUrl" value="/" required></label>',
    '    <label>Token <input name="token" type="password" required></label>',
    '    <button type="submit">Continue</button>',
    '  </form>',
    '</section>',
  ]
    .filter(Boolean)
    .join('\n');
}

export function renderVideoList(videos: VideoSummary[]): string {
  const items = videos
    .map((v) => {
      const label = v.title || v.video_id;
      const langs = `${v.source_language} → ${v.target_language}`;
      return (
        `  <li><button data-action="open-video" data-video-id="${escapeHtml(v.video_id)}">` +
        `${escapeHtml(label)}</button> <small>${escapeHtml(langs)}, ${v.flagged_count} of ` +
        `${v.sentence_count} flagged</small></li>`
      );
    })
    .join('\n');
  return [
    '<section class="video-list">',
    '  <h1>Videos</h1>',
    videos.length ? `  <ul>\n${items}\n  </ul>` : '  <p class="empty">No published videos yet.</p>',
    '</section>',
  ].join('\n');
}

export interface QueueViewState {
  videoId: string;
  rows: ReviewRow[];
  /** Per-sentence draft text, kept across re-renders. */
  drafts: Map<string, string>;
  /** Per-sentence inline validation or submission error. */
  rowErrors: Map<string, string>;
  /** Page-level error banner, e.g. a failed refresh; retryable. */
  banner?: string;
}

const STATE_BADGES: Record<string, string> = {
  pending: 'pending review',
  accepted: 'accepted',
  rejected: 'rejected',
  superseded: 'superseded',
};

function renderRow(row: ReviewRow, view: QueueViewState): string {
  const classes = row.flagged ? 'review-row flagged' : 'review-row';
  const draft = view.drafts.get(row.sentenceId) ?? row.myPendingContribution ?? '';
  const rowError = view.rowErrors.get(row.sentenceId);
  const badge = row.lastState
    ? `<span class="badge ${row.lastState}">${STATE_BADGES[row.lastState] ?? row.lastState}</span>`
    : '';
  const score = row.currentF1 === null ? 'unscored' : `f1 ${row.currentF1.toFixed(3)}`;
  return [
    `<tr class="${classes}" data-sentence-id="${escapeHtml(row.sentenceId)}">`,
    `  <td class="index">${row.index}</td>`,
    `  <td class="original">${escapeHtml(row.originalText)}</td>`,
    '  <td class="translation">',
    `    <div class="current">${escapeHtml(row.currentTranslation)} <small>${escapeHtml(score)}</small> ${badge}</div>`,
    `    <input class="proposal" data-sentence-id="${escapeHtml(row.sentenceId)}" value="${escapeHtml(draft)}" placeholder="Suggest a better translation">`,
    `    <button data-action="submit" data-sentence-id="${escapeHtml(row.sentenceId)}">Submit</button>`,
    rowError ? `    <p class="row-error">${escapeHtml(rowError)}</p>` : '',
    '  </td>',
    '</tr>',
  ]
    .filter(Boolean)
    .join('\n');
}

export function renderQueue(view: QueueViewState): string {
  const banner = view.banner
    ? `  <p class="banner error">${escapeHtml(view.banner)} <button data-action="retry">Retry</button></p>`
    : '';
  const body = view.rows.map((row) => renderRow(row, view)).join('\n');
  return [
    '<section class="review-queue">',
    `  <h1>Sentences in ${escapeHtml(view.videoId)}</h1>`,
    '  <p><button data-action="back">All videos</button></p>',
    banner,
    '  <table>',
    '    <thead><tr><th>#</th><th>Original</th><th>Translation</th></tr></thead>',
    `    <tbody>\n${body}\n    </tbody>`,
    '  </table>',
    '</section>',
  ]
    .filter(Boolean)
    .join('\n');
}

/** Full-page notice, e.g. an unknown video id or an unreachable API. */
export function renderNotice(message: string, retryable = true): string {
  const retry = retryable ? ' <button data-action="retry">Retry</button>' : '';
  return [
    '<section class="notice">',
    `  <p class="banner error">${escapeHtml(message)}${retry}</p>`,
    '  <p><button data-action="back">All videos</button></p>',
    '</section>',
  ].join('\n');
}

/**
 * DOM shim: owns the container element, routes between the token-entry,
 * video-list, and review-queue views, and delegates all behavior to the
 * pure modules. Contribution states are re-polled on a timer.
 */

import { ApiClient, ApiError } from './api.js';
import { renderNotice, renderQueue, renderTokenEntry, renderVideoList } from './render.js';
import { applyOutcome, buildRows, submitCorrection } from './state.js';
import type { ClientConfig, ReviewRow, VideoSummary } from './types.js';
import { DEFAULT_POLL_INTERVAL_MS } from './types.js';

type View =
  | { name: 'token-entry'; error?: string }
  | { name: 'videos'; videos: VideoSummary[] }
  | { name: 'queue'; videoId: string; rows: ReviewRow[]; banner?: string }
  | { name: 'notice'; message: string };

export class ReviewController {
  private api: ApiClient | null = null;
  private config: ClientConfig | null = null;
  private view: View = { name: 'token-entry' };
  /** The API reveals the caller's user id on the first accepted POST. */
  private userId: string | null = null;
  private readonly drafts = new Map<string, string>();
  private readonly rowErrors = new Map<string, string>();
  private readonly inFlight = new Set<string>();
  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(private readonly root: HTMLElement) {
    root.addEventListener('submit', (event) => this.onSubmit(event));
    root.addEventListener('click', (event) => this.onClick(event));
    root.addEventListener('input', (event) => this.onInput(event));
  }

  start(): void {
    this.paint();
  }

  private paint(): void {
    switch (this.view.name) {
      case 'token-entry':
        this.root.innerHTML = renderTokenEntry(this.view.error);
        break;
      case 'videos':
        this.root.innerHTML = renderVideoList(this.view.videos);
        break;
      case 'queue':
        this.root.innerHTML = renderQueue({
          videoId: this.view.videoId,
          rows: this.view.rows,
          drafts: this.drafts,
          rowErrors: this.rowErrors,
          banner: this.view.banner,
        });
        break;
      case 'notice':
        this.root.innerHTML = renderNotice(this.view.message);
        break;
    }
  }

  private onSubmit(event: Event): void {
    const form = event.target as HTMLFormElement;
    if (form.dataset['action'] !== 'configure') {
      return;
    }
    event.preventDefault();
    const data = new FormData(form);
    const baseUrl = String(data.get('baseUrl') ?? '').trim();
    const token = String(data.get('token') ?? '').trim();
    if (!token) {
      this.view = { name: 'token-entry', error: 'A contributor token is required.' };
      this.paint();
      return;
    }
    this.config = { baseUrl, token, pollIntervalMs: DEFAULT_POLL_INTERVAL_MS };
    this.api = new ApiClient(this.config);
    void this.showVideos();
  }

  private onClick(event: Event): void {
    const target = (event.target as HTMLElement).closest<HTMLElement>('[data-action]');
    if (!target) {
      return;
    }
    switch (target.dataset['action']) {
      case 'open-video':
        void this.showQueue(target.dataset['videoId'] ?? '');
        break;
      case 'back':
        void this.showVideos();
        break;
      case 'retry':
        void (this.view.name === 'queue' ? this.showQueue(this.view.videoId) : this.showVideos());
        break;
      case 'submit':
        void this.onSubmitCorrection(target.dataset['sentenceId'] ?? '');
        break;
    }
  }

  private onInput(event: Event): void {
    const input = event.target as HTMLInputElement;
    const sentenceId = input.dataset['sentenceId'];
    if (sentenceId && input.classList.contains('proposal')) {
      this.drafts.set(sentenceId, input.value);
    }
  }

  private async showVideos(): Promise<void> {
    if (!this.api) {
      return;
    }
    this.stopPolling();
    try {
      this.view = { name: 'videos', videos: await this.api.listVideos() };
    } catch (err) {
      this.handleFetchError(err, 'Could not load the video list');
      return;
    }
    this.paint();
  }

  private async showQueue(videoId: string): Promise<void> {
    if (!this.api) {
      return;
    }
    try {
      this.view = { name: 'queue', videoId, rows: await this.loadRows(videoId) };
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.view = { name: 'notice', message: `Unknown video "${videoId}".` };
        this.paint();
        return;
      }
      this.handleFetchError(err, 'Could not load the sentences');
      return;
    }
    this.paint();
    this.startPolling(videoId);
  }

  private async loadRows(videoId: string): Promise<ReviewRow[]> {
    if (!this.api) {
      return [];
    }
    const sentences = await this.api.listSentences(videoId);
    const mine = this.userId ? await this.api.listContributions(this.userId) : [];
    return buildRows(sentences, mine);
  }

  private async refreshQueue(): Promise<void> {
    if (this.view.name !== 'queue') {
      return;
    }
    const videoId = this.view.videoId;
    try {
      this.view = { name: 'queue', videoId, rows: await this.loadRows(videoId) };
    } catch (err) {
      // A failed poll keeps the last good rows and shows a retryable banner.
      const detail = err instanceof Error ? err.message : String(err);
      this.view = { ...this.view, banner: `Refresh failed: ${detail}` };
    }
    this.paint();
  }

  private async onSubmitCorrection(sentenceId: string): Promise<void> {
    if (this.view.name !== 'queue' || !this.api) {
      return;
    }
    const row = this.view.rows.find((r) => r.sentenceId === sentenceId);
    if (!row) {
      return;
    }
    const text = this.drafts.get(sentenceId) ?? row.myPendingContribution ?? '';
    const outcome = await submitCorrection(this.api, row, text, this.inFlight);
    switch (outcome.kind) {
      case 'invalid':
        this.rowErrors.set(sentenceId, outcome.message);
        break;
      case 'in-flight':
        return; // First request is still running; nothing to repaint.
      case 'accepted':
        this.userId = outcome.contribution.user_id;
        this.rowErrors.delete(sentenceId);
        this.drafts.delete(sentenceId);
        if (this.view.name === 'queue') {
          this.view = { ...this.view, rows: applyOutcome(this.view.rows, outcome) };
        }
        break;
      case 'failed':
        // The draft stays in place so the reviewer can retry the same edit.
        this.drafts.set(sentenceId, outcome.retainedText);
        this.rowErrors.set(
          sentenceId,
          outcome.network ? `Could not reach the API: ${outcome.message}` : outcome.message,
        );
        break;
    }
    this.paint();
  }

  private handleFetchError(err: unknown, prefix: string): void {
    if (err instanceof ApiError && err.status === 401) {
      this.api = null;
      this.config = null;
      this.stopPolling();
      this.view = { name: 'token-entry', error: 'The token was not accepted; sign in again.' };
    } else {
      const detail = err instanceof Error ? err.message : String(err);
      this.view = { name: 'notice', message: `${prefix}: ${detail}` };
    }
    this.paint();
  }

  private startPolling(videoId: string): void {
    this.stopPolling();
    const interval = this.config?.pollIntervalMs ?? DEFAULT_POLL_INTERVAL_MS;
    if (interval <= 0) {
      return;
    }
    this.pollTimer = setInterval(() => {
      if (this.view.name === 'queue' && this.view.videoId === videoId) {
        void this.refreshQueue();
      }
    }, interval);
  }

  private stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }
}

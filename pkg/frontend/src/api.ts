/**
 * Thin typed client for the /v1 contribution API. Every failure surfaces
 * as an ApiError; network-level failures get status 0 so callers can tell
 * "server said no" from "request never arrived".
 */

import type {
  ApiErrorBody,
  ClientConfig,
  ContributionPayload,
  SentencePayload,
  VideoSummary,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly details: Record<string, unknown> = {},
  ) {
    super(message);
    this.name = 'ApiError';
  }

  get isNetwork(): boolean {
    return this.status === 0;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly config: Pick<ClientConfig, 'baseUrl' | 'token'>,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  async listVideos(): Promise<VideoSummary[]> {
    const body = await this.request('GET', '/v1/videos');
    return (body as { videos: VideoSummary[] }).videos;
  }

  async listSentences(videoId: string): Promise<SentencePayload[]> {
    const body = await this.request('GET', `/v1/videos/${encodeURIComponent(videoId)}/sentences`);
    return (body as { sentences: SentencePayload[] }).sentences;
  }

  async listContributions(userId: string): Promise<ContributionPayload[]> {
    const body = await this.request('GET', `/v1/contributions?user=${encodeURIComponent(userId)}`);
    return (body as { contributions: ContributionPayload[] }).contributions;
  }

  async submitContribution(sentenceId: string, proposedText: string): Promise<ContributionPayload> {
    const body = await this.request('POST', '/v1/contributions', {
      sentence_id: sentenceId,
      proposed_text: proposedText,
    });
    return body as ContributionPayload;
  }

  private async request(method: string, path: string, payload?: unknown): Promise<unknown> {
    const headers: Record<string, string> = {};
    if (this.config.token) {
      headers['Authorization'] = `Bearer ${this.config.token}`;
    }
    const init: RequestInit = { method, headers };
    if (payload !== undefined) {
      headers['Content-Type'] = 'application/json';
      init.body = JSON.stringify(payload);
    }

    let response: Response;
    try {
      response = await this.fetchFn(this.config.baseUrl.replace(/\/$/, '') + path, init);
    } catch (err) {
      throw new ApiError(0, 'NetworkError', err instanceof Error ? err.message : String(err));
    }

    if (response.ok) {
      return response.json();
    }
    let body: Partial<ApiErrorBody> = {};
    try {
      body = (await response.json()) as Partial<ApiErrorBody>;
    } catch {
      // Non-JSON error body; keep the HTTP status as the only signal.
    }
    throw new ApiError(
      response.status,
      body.code ?? `Http${response.status}`,
      body.message ?? `request failed with status ${response.status}`,
      body.details ?? {},
    );
  }
}

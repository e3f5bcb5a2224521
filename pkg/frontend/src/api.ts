import type {
  ArtifactSlice,
  Level1Document,
  Level2Document,
  StreamEvent,
  SummaryCard,
} from './types.js';
import { consumeSse, decodeStream } from './sse.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

// Thin typed client over the explanation service; every request goes through
// the injected fetch so tests can observe and stub the traffic.
export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const body = (await response.json()) as { error?: { message?: string } };
        if (body.error?.message) detail = body.error.message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(detail, response.status);
    }
    return response;
  }

  async sessionInfo(sessionId: string): Promise<{ status: string; cards: number }> {
    const response = await this.request(`/sessions/${sessionId}`);
    return (await response.json()) as { status: string; cards: number };
  }

  // Streams card/complete/error events, invoking onEvent in arrival order.
  async streamEvents(sessionId: string, onEvent: (event: StreamEvent) => void): Promise<void> {
    const response = await this.request(`/sessions/${sessionId}/events`);
    if (!response.body) {
      throw new ApiError('event stream has no body', response.status);
    }
    await consumeSse(decodeStream(response.body), (frame) => {
      const data = JSON.parse(frame.data) as unknown;
      if (frame.event === 'card') {
        onEvent({ event: 'card', data: data as SummaryCard });
      } else if (frame.event === 'complete') {
        onEvent({ event: 'complete', data: data as Level1Document });
      } else if (frame.event === 'error') {
        onEvent({ event: 'error', data: data as { type: string; message: string } });
      }
    });
  }

  async level2(sessionId: string, orderIndex: number): Promise<Level2Document> {
    const response = await this.request(`/sessions/${sessionId}/changes/${orderIndex}/level2`, {
      method: 'POST',
    });
    return (await response.json()) as Level2Document;
  }

  async artifactSlice(
    sessionId: string,
    artifactId: string,
    start: number,
    end: number,
  ): Promise<ArtifactSlice> {
    const response = await this.request(
      `/sessions/${sessionId}/artifacts/${artifactId}?start=${start}&end=${end}`,
    );
    return (await response.json()) as ArtifactSlice;
  }
}

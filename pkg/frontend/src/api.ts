/** Fetch client for the analysis service.
 *
 * Responses are cached by (method, path, body) and concurrent identical
 * requests coalesce onto one in-flight promise, so scrubbing back to an
 * already-loaded window never issues another network request.
 */

import type {
  AnalyzeRequestBody,
  AnalyzeResponse,
  DendrogramRequestBody,
  DendrogramResponse,
  EmbeddingRequestBody,
  EmbeddingResponse,
  EventRecord,
  TimelineResponse,
  Topology,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  private cache = new Map<string, Promise<unknown>>();
  /** Total requests that actually hit the network (visible for tests). */
  fetchCount = 0;

  constructor(
    readonly baseUrl: string,
    private fetchFn: typeof fetch = fetch,
  ) {}

  private request<T>(path: string, body?: unknown): Promise<T> {
    const key = body === undefined ? `GET ${path}` : `POST ${path} ${JSON.stringify(body)}`;
    const hit = this.cache.get(key);
    if (hit) return hit as Promise<T>;
    this.fetchCount += 1;
    const promise = this.fetchFn(`${this.baseUrl}${path}`, {
      method: body === undefined ? "GET" : "POST",
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    }).then(async (res) => {
      if (!res.ok) {
        const text = await res.text();
        throw new ApiError(res.status, `${path} -> ${res.status}: ${text}`);
      }
      return (await res.json()) as T;
    });
    // Failed requests are not cached; a retry should hit the network again.
    this.cache.set(
      key,
      promise.catch((err) => {
        this.cache.delete(key);
        throw err;
      }),
    );
    return this.cache.get(key) as Promise<T>;
  }

  topology(): Promise<Topology> {
    return this.request("/topology");
  }

  events(): Promise<EventRecord[]> {
    return this.request("/events");
  }

  analyze(body: AnalyzeRequestBody): Promise<AnalyzeResponse> {
    return this.request("/analyze", body);
  }

  timeline(params: { from: string; to: string; window_s: number; attribute: string }): Promise<TimelineResponse> {
    const qs = new URLSearchParams({
      from: params.from,
      to: params.to,
      window_s: String(params.window_s),
      attribute: params.attribute,
    });
    return this.request(`/timeline?${qs.toString()}`);
  }

  dendrogram(body: DendrogramRequestBody): Promise<DendrogramResponse> {
    return this.request("/dendrogram", body);
  }

  embedding(body: EmbeddingRequestBody): Promise<EmbeddingResponse> {
    return this.request("/embedding", body);
  }
}

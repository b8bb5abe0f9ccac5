// Thin typed client over the annotation service HTTP API.

export interface Task {
  cluster_id: number;
  members: string[];
  remaining: string[];
  round: number;
  previews: string[];
}

export interface RoundResult {
  remaining: string[];
  terminal: boolean;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public offending: string[] = [],
  ) {
    super(message);
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private token: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  /** Next open cluster for this annotator, or null when all are done. */
  async nextCluster(): Promise<Task | null> {
    const res = await this.fetchFn(
      `${this.baseUrl}/api/clusters/next?annotator=${encodeURIComponent(this.token)}`,
    );
    if (res.status === 204) return null;
    if (!res.ok) throw new ApiError(res.status, await res.text());
    return (await res.json()) as Task;
  }

  async submitRound(clusterId: number, checked: string[]): Promise<RoundResult> {
    const res = await this.fetchFn(
      `${this.baseUrl}/api/clusters/${clusterId}/rounds`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ annotator: this.token, checked }),
      },
    );
    if (!res.ok) {
      const body = await res.json().catch(() => ({}));
      const detail = (body as { detail?: { message?: string; offending?: string[] } }).detail;
      throw new ApiError(
        res.status,
        detail?.message ?? `round rejected (${res.status})`,
        detail?.offending ?? [],
      );
    }
    return (await res.json()) as RoundResult;
  }

  previewUrl(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  /** Raw XYZ text of a model preview. */
  async fetchPreview(path: string): Promise<string> {
    const res = await this.fetchFn(this.previewUrl(path));
    if (!res.ok) throw new ApiError(res.status, `preview unavailable: ${path}`);
    return res.text();
  }
}

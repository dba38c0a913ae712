// Thin typed client for the three ranking-service endpoints.

export interface DatasetPayload {
  dimensions: string[];
  entities: string[];
  values: number[][]; // entity-major, values[c][q]
}

export interface RankRow {
  entity: string;
  ci: number;
  rank: number;
  equalWeightsRank: number;
}

export interface OptimizePayload {
  entity: string;
  topRank: number;
  rStar: number;
  distance: number | null;
  weights: number[];
  proven: boolean;
  stats: { nodes: number; lpSolves: number };
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async dataset(): Promise<DatasetPayload> {
    return this.request("GET", "/api/dataset");
  }

  async rank(weights: number[], mode = "integer"): Promise<RankRow[]> {
    return this.request("POST", "/api/rank", { weights, mode });
  }

  async optimize(entity: string): Promise<OptimizePayload> {
    return this.request("POST", "/api/optimize", {
      entity,
      mode: "integer",
      order: 2,
      direction: "best",
    });
  }

  private async request(method: string, path: string, body?: unknown): Promise<any> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      let message = `HTTP ${response.status}`;
      try {
        const payload = await response.json();
        if (payload && typeof payload.message === "string") {
          message = payload.message;
        }
      } catch {
        // keep the generic message
      }
      throw new ApiError(response.status, message);
    }
    return response.json();
  }
}

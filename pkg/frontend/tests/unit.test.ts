// Behavior tests against a scripted fake service: validation, clamping,
// stale-response discarding, and error surfacing.

import { beforeEach, describe, expect, it } from "vitest";
import { ApiClient, type FetchLike } from "../src/api.js";
import { RankingApp } from "../src/app.js";

const DATASET = {
  dimensions: ["alpha", "beta"],
  entities: ["X", "Y"],
  values: [
    [0.8, 0.2],
    [0.4, 0.9],
  ],
};

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function rankRows(first: string): unknown {
  const second = first === "X" ? "Y" : "X";
  return [
    { entity: first, ci: 7.5, rank: 1, equalWeightsRank: 1 },
    { entity: second, ci: 6.5, rank: 2, equalWeightsRank: 2 },
  ];
}

interface Scripted {
  fetchImpl: FetchLike;
  rankCalls: () => number;
  resolveRank: (index: number, winner: string) => void;
}

function scriptedService(): Scripted {
  const pending: Array<(r: Response) => void> = [];
  let rankCount = 0;
  const fetchImpl: FetchLike = async (input, init) => {
    if (input.endsWith("/api/dataset")) {
      return jsonResponse(DATASET);
    }
    if (input.endsWith("/api/rank")) {
      rankCount += 1;
      return new Promise<Response>((resolve) => {
        pending.push(resolve);
      });
    }
    throw new Error(`unexpected request ${init?.method} ${input}`);
  };
  return {
    fetchImpl,
    rankCalls: () => rankCount,
    resolveRank: (index, winner) => pending[index](jsonResponse(rankRows(winner))),
  };
}

describe("RankingApp", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="app"></div>';
    root = document.getElementById("app")!;
  });

  it("discards stale ranking responses by sequence number", async () => {
    const service = scriptedService();
    const api = new ApiClient("", service.fetchImpl);
    const appPromise = RankingApp.create(root, api, { debounceMs: 1 });
    // initial request (seq 1)
    await waitFor(() => service.rankCalls() === 1);
    service.resolveRank(0, "X");
    const app = await appPromise;

    app.onWeightChange(0, 5); // seq 2
    await waitFor(() => service.rankCalls() === 2);
    app.onWeightChange(1, 5); // seq 3
    await waitFor(() => service.rankCalls() === 3);

    service.resolveRank(2, "Y"); // newest finishes first
    await waitFor(() => firstEntity(root) === "Y");
    service.resolveRank(1, "X"); // stale response must be ignored
    await app.settle();
    expect(firstEntity(root)).toBe("Y");
  });

  it("clamps slider values into 0..5", async () => {
    const service = scriptedService();
    const api = new ApiClient("", service.fetchImpl);
    const appPromise = RankingApp.create(root, api, { debounceMs: 1 });
    await waitFor(() => service.rankCalls() === 1);
    service.resolveRank(0, "X");
    const app = await appPromise;

    app.onWeightChange(0, 9);
    expect(app.weights[0]).toBe(5);
    app.onWeightChange(0, -3);
    expect(app.weights[0]).toBe(0);
  });

  it("rejects all-zero weights client-side without a request", async () => {
    const service = scriptedService();
    const api = new ApiClient("", service.fetchImpl);
    const appPromise = RankingApp.create(root, api, { debounceMs: 1 });
    await waitFor(() => service.rankCalls() === 1);
    service.resolveRank(0, "X");
    const app = await appPromise;

    const before = service.rankCalls();
    app.onWeightChange(0, 0);
    app.onWeightChange(1, 0);
    const validation = root.querySelector('[data-testid="validation"]') as HTMLElement;
    expect(validation.hidden).toBe(false);
    await sleep(30); // longer than the debounce window
    expect(service.rankCalls()).toBe(before);
  });

  it("surfaces optimize failures in a dismissible banner and keeps sliders", async () => {
    const service = scriptedService();
    const failing: FetchLike = async (input, init) => {
      if (input.endsWith("/api/optimize")) {
        return jsonResponse({ code: "unknown_entity", message: "unknown entity" }, 404);
      }
      return service.fetchImpl(input, init);
    };
    const api = new ApiClient("", failing);
    const appPromise = RankingApp.create(root, api, { debounceMs: 1 });
    await waitFor(() => service.rankCalls() === 1);
    service.resolveRank(0, "X");
    const app = await appPromise;

    const weightsBefore = [...app.weights];
    await app.optimizeSelected();
    const banner = root.querySelector('[data-testid="error-banner"]') as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(app.weights).toEqual(weightsBefore);
    (root.querySelector('[data-testid="dismiss-error"]') as HTMLElement).click();
    expect(banner.hidden).toBe(true);
  });
});

function firstEntity(root: HTMLElement): string | undefined {
  const cell = root.querySelector('[data-testid="ranking"] tbody tr td.entity');
  return cell?.textContent ?? undefined;
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitFor(check: () => boolean, timeoutMs = 5_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!check()) {
    if (Date.now() > deadline) {
      throw new Error("condition not reached in time");
    }
    await sleep(5);
  }
}

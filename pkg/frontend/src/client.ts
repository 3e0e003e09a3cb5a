// Typed client for the prediction service. The fetch implementation is
// injected so tests can run against a real server, a stub, or a dead port
// without touching globals.

import type { HealthResponse, WhatifResponse, WinprobResponse, WireGameState } from "./wire.js";

export class ServiceError extends Error {
  constructor(message: string, readonly status: number | null) {
    super(message);
    this.name = "ServiceError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  health(): Promise<HealthResponse> {
    return this.request("GET", "/v1/health");
  }

  winprob(state: WireGameState): Promise<WinprobResponse> {
    return this.request("POST", "/v1/winprob", state);
  }

  whatif(base: WireGameState, variants: WireGameState[]): Promise<WhatifResponse> {
    return this.request("POST", "/v1/whatif", { base, variants });
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (exc) {
      throw new ServiceError(`service unreachable: ${(exc as Error).message}`, null);
    }
    if (!resp.ok) {
      throw new ServiceError(await errorMessage(resp), resp.status);
    }
    return (await resp.json()) as T;
  }
}

async function errorMessage(resp: Response): Promise<string> {
  try {
    const body = (await resp.json()) as { error?: { message?: string } };
    if (body.error?.message) {
      return body.error.message;
    }
  } catch {
    // fall through to the status line
  }
  return `service returned ${resp.status}`;
}

// Typed client for the quantrisk HTTP API. Every number shown in the UI
// originates from one of these calls; the client computes nothing itself.

import type {
  AssessRequest,
  AssessmentDoc,
  CatalogDoc,
  ChainDoc,
  ContextDoc,
  Finding,
  MatrixDoc,
  OverridesDoc,
  WhatIfDiffDoc,
} from "./types";

export class ApiError extends Error {
  status: number;
  code: string;
  findings: Finding[];

  constructor(status: number, code: string, message: string, findings: Finding[] = []) {
    super(message);
    this.status = status;
    this.code = code;
    this.findings = findings;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Api {
  private baseUrl: string;
  private fetchFn: FetchLike;

  constructor(baseUrl = "", fetchFn: FetchLike = (...args) => fetch(...args)) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { "Content-Type": "application/json", ...(init?.headers ?? {}) },
      ...init,
    });
    const text = await response.text();
    const body = text ? JSON.parse(text) : null;
    if (!response.ok) {
      throw new ApiError(
        response.status,
        body?.code ?? "error",
        body?.message ?? response.statusText,
        body?.findings ?? [],
      );
    }
    return body as T;
  }

  getCatalog(): Promise<{ revision: number; catalog: CatalogDoc }> {
    return this.request("/api/catalog");
  }

  putCatalog(catalog: CatalogDoc, revision?: number): Promise<{ revision: number }> {
    return this.request("/api/catalog", {
      method: "PUT",
      body: JSON.stringify(catalog),
      headers: revision === undefined ? {} : { "If-Match": String(revision) },
    });
  }

  listChains(): Promise<{ revision: number; chains: ChainDoc[]; context: ContextDoc }> {
    return this.request("/api/chains");
  }

  createChain(chain: ChainDoc, revision?: number): Promise<{ id: string; revision: number }> {
    return this.request("/api/chains", {
      method: "POST",
      body: JSON.stringify(chain),
      headers: revision === undefined ? {} : { "If-Match": String(revision) },
    });
  }

  updateChain(chain: ChainDoc, revision?: number): Promise<{ id: string; revision: number }> {
    return this.request(`/api/chains/${encodeURIComponent(chain.id)}`, {
      method: "PUT",
      body: JSON.stringify(chain),
      headers: revision === undefined ? {} : { "If-Match": String(revision) },
    });
  }

  deleteChain(chainId: string, revision?: number): Promise<{ revision: number }> {
    return this.request(`/api/chains/${encodeURIComponent(chainId)}`, {
      method: "DELETE",
      headers: revision === undefined ? {} : { "If-Match": String(revision) },
    });
  }

  assess(config: AssessRequest): Promise<{ revision: number; result: AssessmentDoc }> {
    return this.request("/api/assess", { method: "POST", body: JSON.stringify(config) });
  }

  whatIf(config: AssessRequest, overrides: OverridesDoc):
      Promise<{ revision: number; diff: WhatIfDiffDoc }> {
    return this.request("/api/whatif", {
      method: "POST",
      body: JSON.stringify({ config, overrides }),
    });
  }

  getMatrix(): Promise<MatrixDoc> {
    return this.request("/api/matrix");
  }
}

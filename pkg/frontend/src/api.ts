/**
 * Typed client for the scenario-archive HTTP API.
 *
 * Every response body passes through its runtime contract before callers see
 * it. Failures are normalized to ApiError carrying the server's machine code
 * (or "network" / "bad-payload" for transport-level trouble).
 */
import { z } from "zod";
import {
  ConceptInstances,
  Health,
  OntologyTree,
  QueryResponse,
  ScenarioDocument,
  ScenarioList,
  SimulateResponse,
  ValidationReport,
  conceptInstances,
  created,
  errorEnvelope,
  health,
  ontologyTree,
  queryResponse,
  scenarioDocument,
  scenarioList,
  simulateResponse,
  validationReport,
} from "./contracts.js";

export type FetchLike = (
  url: string,
  init?: {
    method?: string;
    headers?: Record<string, string>;
    body?: string;
  },
) => Promise<{
  status: number;
  ok: boolean;
  json(): Promise<unknown>;
}>;

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
    readonly details: string[] = [],
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface ApiClientOptions {
  baseUrl: string;
  token?: string;
  fetchImpl?: FetchLike;
}

export interface SimulateRequest {
  predicate?: string;
  bounds?: {
    max_markings?: number;
    max_tokens_per_place?: number;
    max_depth?: number;
  };
  all_paths?: boolean;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly token?: string;
  private readonly fetchImpl: FetchLike;

  constructor(options: ApiClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/+$/, "");
    this.token = options.token;
    this.fetchImpl =
      options.fetchImpl ?? (globalThis.fetch as unknown as FetchLike);
  }

  health(): Promise<Health> {
    return this.request("GET", "/health", undefined, health);
  }

  ontologyTree(): Promise<OntologyTree> {
    return this.request("GET", "/ontology/tree", undefined, ontologyTree);
  }

  conceptInstances(
    conceptId: string,
    transitive = true,
  ): Promise<ConceptInstances> {
    const path = `/ontology/concepts/${encodeURIComponent(conceptId)}/instances?transitive=${transitive}`;
    return this.request("GET", path, undefined, conceptInstances);
  }

  listScenarios(filter?: {
    status?: string;
    q?: string;
  }): Promise<ScenarioList> {
    const params = new URLSearchParams();
    if (filter?.status) params.set("status", filter.status);
    if (filter?.q) params.set("q", filter.q);
    const suffix = params.size ? `?${params}` : "";
    return this.request("GET", `/scenarios${suffix}`, undefined, scenarioList);
  }

  getScenario(id: string): Promise<ScenarioDocument> {
    return this.request(
      "GET",
      `/scenarios/${encodeURIComponent(id)}`,
      undefined,
      scenarioDocument,
    );
  }

  async createScenario(doc: unknown): Promise<string> {
    const body = await this.request("POST", "/scenarios", doc, created);
    return body.id;
  }

  async replaceScenario(id: string, doc: unknown): Promise<string> {
    const body = await this.request(
      "PUT",
      `/scenarios/${encodeURIComponent(id)}`,
      doc,
      created,
    );
    return body.id;
  }

  validateScenario(id: string): Promise<ValidationReport> {
    return this.request(
      "POST",
      `/scenarios/${encodeURIComponent(id)}/validate`,
      undefined,
      validationReport,
    );
  }

  simulate(id: string, request: SimulateRequest = {}): Promise<SimulateResponse> {
    return this.request(
      "POST",
      `/scenarios/${encodeURIComponent(id)}/simulate`,
      request,
      simulateResponse,
    );
  }

  query(text: string, projection?: string[]): Promise<QueryResponse> {
    const payload: Record<string, unknown> = { text };
    if (projection) payload.projection = projection;
    return this.request("POST", "/query", payload, queryResponse);
  }

  private async request<T>(
    method: string,
    path: string,
    body: unknown,
    schema: z.ZodType<T>,
  ): Promise<T> {
    const headers: Record<string, string> = { Accept: "application/json" };
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;

    let response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        method,
        headers,
        ...(body !== undefined ? { body: JSON.stringify(body) } : {}),
      });
    } catch (cause) {
      throw new ApiError("network", `cannot reach ${this.baseUrl}: ${cause}`, 0);
    }

    let payload: unknown;
    try {
      payload = await response.json();
    } catch {
      throw new ApiError(
        "bad-payload",
        `non-JSON response (HTTP ${response.status}) from ${path}`,
        response.status,
      );
    }

    if (!response.ok) {
      const envelope = errorEnvelope.safeParse(payload);
      if (envelope.success) {
        throw new ApiError(
          envelope.data.code,
          envelope.data.message,
          response.status,
          envelope.data.details,
        );
      }
      throw new ApiError(
        "bad-payload",
        `HTTP ${response.status} from ${path} without an error envelope`,
        response.status,
      );
    }

    const parsed = schema.safeParse(payload);
    if (!parsed.success) {
      throw new ApiError(
        "bad-payload",
        `response from ${path} violates the contract: ${parsed.error.issues[0]?.message ?? "unknown"}`,
        response.status,
      );
    }
    return parsed.data;
  }
}

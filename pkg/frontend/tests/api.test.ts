/**
 * API client behaviour with a stubbed transport: request shapes, bearer
 * auth, error-envelope mapping, and contract enforcement on responses.
 */
import { describe, expect, it } from "vitest";
import { ApiClient, ApiError, FetchLike } from "../src/api.js";
import { fixture } from "./helpers.js";

interface Call {
  url: string;
  method: string;
  headers: Record<string, string>;
  body?: string;
}

function transport(
  responses: { status: number; body: unknown }[],
): { calls: Call[]; fetchImpl: FetchLike } {
  const calls: Call[] = [];
  const queue = [...responses];
  const fetchImpl: FetchLike = async (url, init) => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      headers: init?.headers ?? {},
      ...(init?.body !== undefined ? { body: init.body } : {}),
    });
    const next = queue.shift();
    if (!next) throw new Error("transport queue exhausted");
    return {
      status: next.status,
      ok: next.status >= 200 && next.status < 300,
      json: async () => next.body,
    };
  };
  return { calls, fetchImpl };
}

describe("request construction", () => {
  it("targets the endpoint paths and encodes ids", async () => {
    const { calls, fetchImpl } = transport([
      { status: 200, body: fixture("health.json") },
      { status: 200, body: fixture("demo-collision.json") },
    ]);
    const api = new ApiClient({ baseUrl: "http://api.test/", fetchImpl });
    await api.health();
    await api.getScenario("demo-collision");
    expect(calls[0]?.url).toBe("http://api.test/health");
    expect(calls[1]?.url).toBe("http://api.test/scenarios/demo-collision");
    expect(calls[1]?.method).toBe("GET");
  });

  it("sends JSON bodies with the content type", async () => {
    const { calls, fetchImpl } = transport([
      { status: 200, body: fixture("query-collision.json") },
    ]);
    const api = new ApiClient({ baseUrl: "http://api.test", fetchImpl });
    await api.query('risks isa "collision"', ["id", "title", "status", "stars"]);
    expect(calls[0]?.method).toBe("POST");
    expect(calls[0]?.headers["Content-Type"]).toBe("application/json");
    expect(JSON.parse(calls[0]?.body ?? "{}")).toEqual({
      text: 'risks isa "collision"',
      projection: ["id", "title", "status", "stars"],
    });
  });

  it("attaches the bearer token when configured", async () => {
    const { calls, fetchImpl } = transport([
      { status: 200, body: fixture("health.json") },
    ]);
    const api = new ApiClient({
      baseUrl: "http://api.test",
      token: "sesame",
      fetchImpl,
    });
    await api.health();
    expect(calls[0]?.headers["Authorization"]).toBe("Bearer sesame");
  });

  it("builds listing query strings", async () => {
    const { calls, fetchImpl } = transport([
      { status: 200, body: fixture("scenarios.json") },
    ]);
    const api = new ApiClient({ baseUrl: "http://api.test", fetchImpl });
    await api.listScenarios({ status: "validated", q: "collision" });
    expect(calls[0]?.url).toBe(
      "http://api.test/scenarios?status=validated&q=collision",
    );
  });
});

describe("error handling", () => {
  it("maps error envelopes to ApiError with code and status", async () => {
    const { fetchImpl } = transport([
      { status: 404, body: fixture("error-not-found.json") },
    ]);
    const api = new ApiClient({ baseUrl: "http://api.test", fetchImpl });
    const error = await api.getScenario("never-created").catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.code).toBe("not-found");
    expect(error.status).toBe(404);
  });

  it("maps the 409 no-net envelope from the simulate endpoint", async () => {
    const { fetchImpl } = transport([
      { status: 409, body: fixture("error-no-net.json") },
    ]);
    const api = new ApiClient({ baseUrl: "http://api.test", fetchImpl });
    const error = await api.simulate("exemplar-collision").catch((e) => e);
    expect(error.code).toBe("no-net");
    expect(error.status).toBe(409);
  });

  it("rejects responses that violate the contract", async () => {
    const { fetchImpl } = transport([
      { status: 200, body: { status: "ok" } }, // health without the other fields
    ]);
    const api = new ApiClient({ baseUrl: "http://api.test", fetchImpl });
    const error = await api.health().catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.code).toBe("bad-payload");
  });

  it("labels transport failures as network errors", async () => {
    const fetchImpl: FetchLike = async () => {
      throw new Error("connection refused");
    };
    const api = new ApiClient({ baseUrl: "http://down.test", fetchImpl });
    const error = await api.health().catch((e) => e);
    expect(error.code).toBe("network");
    expect(error.status).toBe(0);
  });
});

import { describe, expect, it } from "vitest";

import { Api, ApiError } from "../src/api";

interface Recorded {
  url: string;
  method?: string;
  headers: Record<string, string>;
  body?: string;
}

function stub(status: number, body: unknown) {
  const recorded: Recorded[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    recorded.push({
      url,
      method: init?.method,
      headers: (init?.headers ?? {}) as Record<string, string>,
      body: init?.body as string | undefined,
    });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { recorded, api: new Api("http://svc", fetchFn) };
}

describe("api client", () => {
  it("sends If-Match on mutations when a revision is supplied", async () => {
    const { recorded, api } = stub(200, { revision: 4 });
    await api.deleteChain("pns", 3);
    expect(recorded[0].url).toBe("http://svc/api/chains/pns");
    expect(recorded[0].method).toBe("DELETE");
    expect(recorded[0].headers["If-Match"]).toBe("3");
  });

  it("omits If-Match when no revision is supplied", async () => {
    const { recorded, api } = stub(200, { revision: 1 });
    await api.deleteChain("pns");
    expect("If-Match" in recorded[0].headers).toBe(false);
  });

  it("wraps what-if config and overrides into one body", async () => {
    const { recorded, api } = stub(200, { revision: 0, diff: {} });
    await api.whatIf({ method: "max" }, { steps: [{ chain_id: "c", step_index: 1, multiplier: 0.5 }] });
    expect(JSON.parse(recorded[0].body!)).toEqual({
      config: { method: "max" },
      overrides: { steps: [{ chain_id: "c", step_index: 1, multiplier: 0.5 }] },
    });
  });

  it("surfaces service errors as ApiError with code and findings", async () => {
    const { api } = stub(400, {
      code: "validation_error",
      message: "chain failed validation",
      findings: [{ severity: "error", path: "$.steps[1].phase", message: "phase order violation" }],
    });
    const error = await api.assess({}).catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(400);
    expect(error.code).toBe("validation_error");
    expect(error.findings[0].path).toBe("$.steps[1].phase");
  });

  it("url-encodes chain ids", async () => {
    const { recorded, api } = stub(200, { revision: 1 });
    await api.deleteChain("a/b c");
    expect(recorded[0].url).toBe("http://svc/api/chains/a%2Fb%20c");
  });
});

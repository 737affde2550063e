import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, DEFAULT_INSTRUCTIONS, fetchInstructions } from "../src/api.js";

interface Recorded {
  url: string;
  init?: RequestInit;
}

function stubFetch(status: number, body: unknown) {
  const calls: Recorded[] = [];
  const fn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fn, calls };
}

describe("ApiClient", () => {
  it("creates sessions and maps the response fields", async () => {
    const { fn, calls } = stubFetch(200, {
      session_id: "abc",
      playlist: ["x", "y"],
    });
    const made = await new ApiClient("http://h", fn).createSession();
    expect(made).toEqual({ sessionId: "abc", playlist: ["x", "y"] });
    expect(calls[0].url).toBe("http://h/api/v1/session");
    expect(calls[0].init?.method).toBe("POST");
  });

  it("fetches sessions with the id escaped into the path", async () => {
    const { fn, calls } = stubFetch(200, {
      session_id: "a/b",
      playlist: [],
      scores: {},
    });
    const snap = await new ApiClient("", fn).getSession("a/b");
    expect(snap.scores).toEqual({});
    expect(calls[0].url).toBe("/api/v1/session/a%2Fb");
  });

  it("posts ratings as the service's JSON shape", async () => {
    const { fn, calls } = stubFetch(200, { ok: true });
    await new ApiClient("", fn).submitRating("sess", "stim", 4);
    expect(calls[0].url).toBe("/api/v1/rating");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      session_id: "sess",
      stimulus_id: "stim",
      score: 4,
    });
    expect(
      (calls[0].init?.headers as Record<string, string>)["Content-Type"],
    ).toBe("application/json");
  });

  it("turns non-2xx responses into ApiError with the status", async () => {
    const { fn } = stubFetch(404, { detail: "unknown session" });
    const err = await new ApiClient("", fn)
      .getSession("nope")
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(404);
  });

  it("reports network failures as status 0", async () => {
    const down = async (): Promise<Response> => {
      throw new TypeError("fetch failed");
    };
    const err = await new ApiClient("", down)
      .createSession()
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(0);
  });

  it("builds audio urls from the opaque stimulus id", () => {
    expect(new ApiClient("http://h:9").audioUrl("k?x")).toBe(
      "http://h:9/api/v1/stimulus/k%3Fx/audio",
    );
  });
});

describe("fetchInstructions", () => {
  it("uses the hosted text when present", async () => {
    const { fn } = stubFetch(200, { text: "Custom wording." });
    expect(await fetchInstructions("", fn)).toBe("Custom wording.");
  });

  it("falls back to the default on 404, bad shape, or network error", async () => {
    const missing = stubFetch(404, { detail: "no file" });
    expect(await fetchInstructions("", missing.fn)).toBe(DEFAULT_INSTRUCTIONS);

    const badShape = stubFetch(200, { wording: "nope" });
    expect(await fetchInstructions("", badShape.fn)).toBe(DEFAULT_INSTRUCTIONS);

    const down = async (): Promise<Response> => {
      throw new TypeError("fetch failed");
    };
    expect(await fetchInstructions("", down)).toBe(DEFAULT_INSTRUCTIONS);
  });
});

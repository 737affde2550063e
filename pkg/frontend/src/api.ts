/** HTTP client for the listening-test service. Rater-facing endpoints only:
 * the admin summary is deliberately not wrapped here. */

export interface SessionCreated {
  sessionId: string;
  playlist: string[];
}

export interface SessionSnapshot {
  sessionId: string;
  playlist: string[];
  scores: Record<string, number>;
}

/** Non-2xx response. `status` 0 means the request never reached the server. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly base: string = "",
    fetchFn?: FetchLike,
  ) {
    // wrap rather than store `fetch` directly: an unbound fetch loses its
    // window/global receiver and throws in browsers
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  async createSession(): Promise<SessionCreated> {
    const body = await this.request("POST", "/api/v1/session");
    return { sessionId: body.session_id, playlist: body.playlist };
  }

  async getSession(sessionId: string): Promise<SessionSnapshot> {
    const body = await this.request(
      "GET",
      `/api/v1/session/${encodeURIComponent(sessionId)}`,
    );
    return {
      sessionId: body.session_id,
      playlist: body.playlist,
      scores: body.scores,
    };
  }

  async submitRating(
    sessionId: string,
    stimulusId: string,
    score: number,
  ): Promise<void> {
    await this.request("POST", "/api/v1/rating", {
      session_id: sessionId,
      stimulus_id: stimulusId,
      score,
    });
  }

  audioUrl(stimulusId: string): string {
    return `${this.base}/api/v1/stimulus/${encodeURIComponent(stimulusId)}/audio`;
  }

  private async request(
    method: string,
    path: string,
    jsonBody?: unknown,
  ): Promise<any> {
    let resp: Response;
    try {
      resp = await this.fetchFn(`${this.base}${path}`, {
        method,
        headers: jsonBody === undefined ? {} : { "Content-Type": "application/json" },
        body: jsonBody === undefined ? undefined : JSON.stringify(jsonBody),
      });
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    if (!resp.ok) {
      throw new ApiError(resp.status, `${method} ${path} failed (${resp.status})`);
    }
    return resp.json();
  }
}

/** Instruction text is a static file next to the app so operators can edit
 * it without a rebuild; fall back to the built-in wording when absent. */
export const DEFAULT_INSTRUCTIONS =
  "You will hear a series of short audio samples. Listen to each sample all " +
  "the way through, then rate its overall quality on a five-point scale. " +
  "There are no right or wrong answers; rate what you hear. You can replay " +
  "a sample as often as you like, but each sample must be rated before the " +
  "next one is presented.";

export async function fetchInstructions(
  base: string,
  fetchFn?: FetchLike,
): Promise<string> {
  const doFetch = fetchFn ?? ((input: string, init?: RequestInit) => fetch(input, init));
  try {
    const resp = await doFetch(`${base}/instructions.json`);
    if (!resp.ok) return DEFAULT_INSTRUCTIONS;
    const doc = await resp.json();
    return typeof doc.text === "string" && doc.text.trim() !== ""
      ? doc.text
      : DEFAULT_INSTRUCTIONS;
  } catch {
    return DEFAULT_INSTRUCTIONS;
  }
}

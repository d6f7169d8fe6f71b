/**
 * Typed HTTP client for the rating service.
 *
 * Endpoints consumed:
 *   GET  /session/:id   blinded session descriptor (validated here)
 *   GET  /audio/:token  WAV bytes for one stimulus (URL built here, fetched
 *                       by the audio layer)
 *   POST /ratings       one rating record per (listener, trial)
 *   GET  /report        aggregate scores over the ratings store
 *
 * The transport is injectable so tests can drive the client against either a
 * stub or a plain node HTTP bridge; the browser entry point passes the real
 * `fetch`.  Only the structural subset of the Fetch API used here is
 * required of the injected function.
 */

import { parseSession, SessionFormatError } from "./session.js";
import type { SessionDescriptor } from "./session.js";

/** The slice of a fetch Response this client needs. */
export interface HttpResponse {
  status: number;
  ok: boolean;
  json(): Promise<unknown>;
}

export interface HttpRequestInit {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}

export type FetchLike = (url: string, init?: HttpRequestInit) => Promise<HttpResponse>;

/** One rating record: integer scores keyed by the blinded stimulus label. */
export interface RatingSubmission {
  listener: string;
  trial: string;
  scores: Record<string, number>;
  timestamp?: string;
}

export interface SubmitResult {
  status: number;
  accepted: boolean;
  /** Human-readable outcome: the server's error text, or "accepted". */
  message: string;
}

/** Raised for transport failures and non-OK responses on GET endpoints. */
export class ServiceError extends Error {
  readonly status: number | undefined;

  constructor(message: string, status?: number) {
    super(message);
    this.name = "ServiceError";
    this.status = status;
  }
}

function errorText(payload: unknown): string | null {
  if (typeof payload === "object" && payload !== null && "error" in payload) {
    const text = (payload as { error: unknown }).error;
    if (typeof text === "string") return text;
  }
  return null;
}

export class MushraApi {
  readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  /** Audio endpoint URL for one blinded stimulus token. */
  audioUrl(stimulusId: string): string {
    return `${this.baseUrl}/audio/${encodeURIComponent(stimulusId)}`;
  }

  /**
   * Fetch and validate the session descriptor.
   *
   * Throws ServiceError on transport/HTTP failure and SessionFormatError on
   * malformed payloads, so the caller can render an error screen instead of
   * a partial session.
   */
  async fetchSession(sessionId: string): Promise<SessionDescriptor> {
    let response: HttpResponse;
    try {
      response = await this.fetchFn(
        `${this.baseUrl}/session/${encodeURIComponent(sessionId)}`,
      );
    } catch (cause) {
      throw new ServiceError(`session request failed: ${String(cause)}`);
    }
    if (!response.ok) {
      throw new ServiceError(
        `session request failed: HTTP ${response.status}`,
        response.status,
      );
    }
    let raw: unknown;
    try {
      raw = await response.json();
    } catch {
      throw new SessionFormatError("session response is not valid JSON");
    }
    return parseSession(raw);
  }

  /**
   * Submit one trial's ratings.  Never throws on an HTTP-level rejection —
   * the status (e.g. 409 for a duplicate) is part of the result so the UI
   * can surface it; only transport failures reject.
   */
  async submitRatings(submission: RatingSubmission): Promise<SubmitResult> {
    const response = await this.fetchFn(`${this.baseUrl}/ratings`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(submission),
    });
    let payload: unknown = null;
    try {
      payload = await response.json();
    } catch {
      // non-JSON error body; fall through to the generic message
    }
    const accepted = response.status === 200;
    const message = accepted
      ? "accepted"
      : errorText(payload) ?? `rejected with HTTP ${response.status}`;
    return { status: response.status, accepted, message };
  }

  /** Aggregate report over everything the service has stored. */
  async fetchReport(): Promise<unknown> {
    const response = await this.fetchFn(`${this.baseUrl}/report`);
    if (!response.ok) {
      throw new ServiceError(
        `report request failed: HTTP ${response.status}`,
        response.status,
      );
    }
    return response.json();
  }
}

/**
 * Plain node:http bridge implementing the client's FetchLike interface, so
 * integration tests exercise real TCP round trips without depending on the
 * DOM environment's fetch implementation.
 */

import { request } from "node:http";

import type { FetchLike, HttpRequestInit, HttpResponse } from "../../src/api.js";

interface RawResponse {
  status: number;
  bytes: Buffer;
}

function rawRequest(url: string, init?: HttpRequestInit): Promise<RawResponse> {
  return new Promise((resolve, reject) => {
    const headers: Record<string, string> = { ...init?.headers };
    if (init?.body !== undefined) {
      // announce the exact length: the service reads Content-Length bytes
      headers["Content-Length"] = String(Buffer.byteLength(init.body));
    }
    const req = request(
      url,
      { method: init?.method ?? "GET", headers },
      (res) => {
        const chunks: Buffer[] = [];
        res.on("data", (chunk: Buffer) => chunks.push(chunk));
        res.on("end", () =>
          resolve({ status: res.statusCode ?? 0, bytes: Buffer.concat(chunks) }),
        );
        res.on("error", reject);
      },
    );
    req.on("error", reject);
    if (init?.body !== undefined) req.write(init.body);
    req.end();
  });
}

export const nodeFetch: FetchLike = async (url, init): Promise<HttpResponse> => {
  const { status, bytes } = await rawRequest(url, init);
  return {
    status,
    ok: status >= 200 && status < 300,
    json: async () => JSON.parse(bytes.toString("utf8")) as unknown,
  };
};

/** GET a URL and return status plus raw body bytes (for audio checks). */
export function getBytes(url: string): Promise<RawResponse> {
  return rawRequest(url);
}

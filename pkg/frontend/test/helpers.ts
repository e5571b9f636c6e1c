import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { FetchLike } from "../src/api.js";

const HERE = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(HERE, "..", "fixtures", name), "utf-8")) as T;
}

/** fetch stand-in that routes paths to canned JSON payloads. */
export function mockFetch(routes: Record<string, (url: URL, init?: RequestInit) => unknown>): FetchLike {
  return async (url, init) => {
    const parsed = new URL(url, "http://fixture.local");
    const handler = routes[parsed.pathname];
    if (!handler) {
      return new Response("not found", { status: 404 });
    }
    const body = handler(parsed, init);
    if (body instanceof Response) return body;
    return new Response(JSON.stringify(body), {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  };
}

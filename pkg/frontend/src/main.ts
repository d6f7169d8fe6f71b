/**
 * Browser entry point.
 *
 * Query parameters:
 *   session   required session id (e.g. "mushra-7")
 *   service   service origin; defaults to the page's own origin, which is
 *             right when this page is served next to the rating service.
 */

import { renderApp } from "./ui.js";

function main(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  if (!sessionId) {
    root.textContent =
      "Missing ?session=<id> — open this page with the session id you were given.";
    return;
  }
  const baseUrl =
    params.get("service") ?? `${window.location.protocol}//${window.location.host}`;
  void renderApp(root, {
    baseUrl,
    sessionId,
    fetchFn: (url, init) => window.fetch(url, init),
  });
}

main();

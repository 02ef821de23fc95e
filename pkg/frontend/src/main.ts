// Browser entry point: pick the route from the URL and mount the dashboard.

import { ApiClient } from "./api";
import { mountDashboard } from "./app";

function routeFromPath(pathname: string): { token: string; readOnly: boolean } | null {
  const owner = pathname.match(/^\/session\/([^/]+)\/?$/);
  if (owner) return { token: owner[1], readOnly: false };
  const shared = pathname.match(/^\/shared\/([^/]+)\/?$/);
  if (shared) return { token: shared[1], readOnly: true };
  return null;
}

const route = routeFromPath(window.location.pathname);
const root = document.getElementById("app");
if (root && route) {
  void mountDashboard(root, {
    token: route.token,
    readOnly: route.readOnly,
    api: new ApiClient(""),
  }).catch(() => {
    // mountDashboard already rendered the not-found notice
  });
} else if (root) {
  root.textContent = "No session in this URL. Launch one with dcc-sidekick.";
}

import { AnnotationClient } from "./api.js";
import { AnnotationApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const root = document.getElementById("app");
if (!(root instanceof HTMLElement)) {
  throw new Error("missing #app mount point");
}

// Same-origin by default (the service can serve these assets itself);
// ?server= points the client somewhere else.
const client = new AnnotationClient(params.get("server") ?? "", (input, init) =>
  window.fetch(input, init),
);

const app = new AnnotationApp(root, client, {
  annotator: params.get("annotator") ?? "",
  onNavigate: (sessionId) => {
    const next = new URLSearchParams(window.location.search);
    next.set("session", sessionId);
    window.history.replaceState(null, "", `?${next.toString()}`);
  },
});

void app.start(params.get("session") ?? undefined);

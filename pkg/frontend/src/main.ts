import { App } from "./app.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}

const app = new App(root, "");
void app.init();

// handy for debugging from the browser console
(window as unknown as { lodestarApp: App }).lodestarApp = app;

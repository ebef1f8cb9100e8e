import { JamApp } from "./app.js";
import { JamClient } from "./api.js";

const params = new URLSearchParams(window.location.search);
const server = params.get("server") ?? "http://127.0.0.1:8080";
const performer = params.get("performer") ?? "web";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app element");
}
new JamApp(root, new JamClient(server), performer).mount();

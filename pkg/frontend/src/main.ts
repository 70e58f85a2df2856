import { ApiClient } from "./api.js";
import { App } from "./app.js";

const root = document.getElementById("root");
if (root) {
  new App(root, new ApiClient("/api/v1"));
}

import { ApiClient } from "./api.js";
import { RankingApp } from "./app.js";

const apiBase = (window as any).RANKOPT_API ?? "";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app container");
}

RankingApp.create(root, new ApiClient(apiBase)).catch((err) => {
  root.textContent = `failed to start: ${err}`;
});

import { ApiClient } from "./api.js";
import { PlannerApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("service") ?? "http://127.0.0.1:8787";
new PlannerApp(document, new ApiClient(base));

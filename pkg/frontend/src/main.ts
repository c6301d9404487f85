import { AnnotationApi } from "./api.js";
import { AnnotationSession } from "./state.js";
import { AnnotatorApp } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8000";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app container");
}
const session = new AnnotationSession(new AnnotationApi(baseUrl));
void new AnnotatorApp(root, session).start();

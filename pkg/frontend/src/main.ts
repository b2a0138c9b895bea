import { createApi } from "./api.js";
import { mountConsole } from "./console.js";

const root = document.getElementById("console");
if (root === null) {
  throw new Error("missing #console element");
}
mountConsole(root, { api: createApi("") });

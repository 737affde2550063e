/** Browser entry point: same-origin service, real localStorage. */

import { ApiClient } from "./api.js";
import { boot } from "./main.js";

const root = document.getElementById("app");
if (root === null) {
  throw new Error("index.html must contain <div id=\"app\">");
}
void boot(root, new ApiClient(""), window.localStorage);

import { ApiClient } from "./api.js";
import { App } from "./app.js";

const params = new URLSearchParams(window.location.search);
const sessionId = params.get("session") ?? "s1";
const client = new ApiClient("", sessionId);
const app = new App(document.getElementById("app")!, client);
void app.start();

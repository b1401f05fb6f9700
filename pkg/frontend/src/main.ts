/** Application wiring. Configuration is limited to the API base URL, read
 * from `window.CIVICDP_API_BASE` (same origin when unset). */

import { ApiClient } from "./api.js";
import { renderFeed } from "./components/feed.js";
import { renderSelection } from "./components/selection.js";
import { renderSetup } from "./components/setup.js";
import { renderSliders } from "./components/sliders.js";
import { renderSweep } from "./components/sweep.js";
import { SessionStore } from "./state.js";

declare global {
  interface Window {
    CIVICDP_API_BASE?: string;
  }
}

export function mountApp(root: HTMLElement, api?: ApiClient): SessionStore {
  const client = api ?? new ApiClient(window.CIVICDP_API_BASE ?? "");
  const store = new SessionStore(client);

  root.innerHTML = `
    <header><h1>Participatory privacy configuration</h1></header>
    <main>
      <section id="setup"></section>
      <section id="sliders"></section>
      <section id="selection"></section>
      <section id="release"></section>
      <section id="sweep"></section>
    </main>
  `;
  renderSetup(root.querySelector("#setup")!, store, client);
  renderSliders(root.querySelector("#sliders")!, store);
  renderSelection(root.querySelector("#selection")!, store);
  renderFeed(root.querySelector("#release")!, store);
  renderSweep(root.querySelector("#sweep")!, store);
  return store;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mountApp(document.getElementById("app")!);
}

/** Release button, budget gauge, and the chat-style report feed.
 * The feed is append-only; refinement suggestions render as one-click
 * presets that move the sliders and re-run selection. */

import { SessionStore, UiState } from "../state.js";

function fmt(x: number): string {
  return String(x);
}

export function renderFeed(root: HTMLElement, store: SessionStore): void {
  root.innerHTML = `
    <fieldset class="panel" id="release-panel">
      <legend>4. Release & reports</legend>
      <div id="budget-gauge">
        <div id="budget-bar-track"><div id="budget-bar"></div></div>
        <span id="budget-text"></span>
      </div>
      <button id="release-button" disabled>Release with selected &epsilon;</button>
      <div id="report-feed"></div>
    </fieldset>
  `;

  const button = root.querySelector<HTMLButtonElement>("#release-button")!;
  button.addEventListener("click", () => {
    void store.release();
  });

  const feedBox = root.querySelector<HTMLElement>("#report-feed")!;
  feedBox.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.matches("button.suggestion")) {
      const change = JSON.parse(target.dataset.change ?? "{}") as Record<string, number>;
      void store.applySuggestion(change);
    }
  });

  let renderedEntries = 0;

  function redraw(state: UiState): void {
    const gaugeText = root.querySelector<HTMLElement>("#budget-text")!;
    const gaugeBar = root.querySelector<HTMLElement>("#budget-bar")!;
    if (state.budget) {
      gaugeText.textContent =
        `${fmt(state.budget.remaining)} of ${fmt(state.budget.total)} remaining`;
      const fraction = state.budget.total > 0 ? state.budget.remaining / state.budget.total : 0;
      gaugeBar.style.width = `${Math.max(0, Math.min(100, fraction * 100))}%`;
      gaugeBar.classList.toggle("blocked", state.error !== null && !state.error.retryable);
    } else {
      gaugeText.textContent = "no session";
      gaugeBar.style.width = "0%";
    }

    button.disabled = state.busy || state.selection === null;

    // append-only rendering: entries already shown are never re-built
    const entries = state.feed;
    for (; renderedEntries < entries.length; renderedEntries += 1) {
      const entry = entries[renderedEntries];
      const item = document.createElement("div");
      if (entry.kind === "utility") {
        item.className = "feed-entry utility";
        item.innerHTML =
          `<h4>Release v${entry.versionId} (seed ${entry.seed})</h4>` +
          `<p>MAE <span class="mae-value">${fmt(entry.utility.mae)}</span>` +
          ` vs expected <span class="expected-value">${fmt(entry.utility.expected_mae)}</span>` +
          ` at &epsilon;=${fmt(entry.utility.epsilon)}</p>`;
      } else {
        const impact = entry.impact;
        item.className = "feed-entry impact";
        const caveats = impact.caveats.map((c) => `<li>${c}</li>`).join("");
        const suggestions = impact.refinement_suggestions
          .map(
            (s) =>
              `<button class="suggestion" data-change='${JSON.stringify(
                s.suggested_profile_change,
              )}'>${s.description}</button>`,
          )
          .join("");
        item.innerHTML =
          `<span class="score-badge">${fmt(impact.privacy_score)}/5</span>` +
          `<p>${impact.narrative}</p>` +
          `<ul class="caveats">${caveats}</ul>` +
          (suggestions ? `<div class="suggestions">${suggestions}</div>` : "") +
          `<small>provider: ${impact.provider}</small>`;
      }
      feedBox.appendChild(item);
    }
  }

  store.subscribe(redraw);
}

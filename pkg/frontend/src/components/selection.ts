/** Live selection view: epsilon badge, closeness bars over the grid, and the
 * decision matrix with raw / normalized / weighted tabs.
 *
 * Every displayed privacy quantity is the verbatim server value
 * (String(x) of the JSON number). The normalized and weighted tabs are
 * presentation transforms of the returned raw matrix and weights.
 */

import { MatrixOut, SelectionOut, WeightsOut } from "../api.js";
import { SessionStore, UiState } from "../state.js";

type MatrixTab = "raw" | "normalized" | "weighted";

function matrixValues(matrix: MatrixOut, weights: WeightsOut, tab: MatrixTab): number[][] {
  if (tab === "raw") return matrix.values;
  const cols = matrix.criteria.length;
  const norms = Array.from({ length: cols }, (_, j) =>
    Math.sqrt(matrix.values.reduce((acc, row) => acc + row[j] * row[j], 0)),
  );
  const w = [weights.privacy, weights.accuracy, weights.compliance, weights.sensitivity];
  return matrix.values.map((row) =>
    row.map((x, j) => {
      const normalized = norms[j] > 0 ? x / norms[j] : 0;
      return tab === "normalized" ? normalized : normalized * w[j];
    }),
  );
}

function fmt(x: number): string {
  return String(x);
}

function shortFmt(x: number): string {
  return Number.isInteger(x) ? String(x) : x.toFixed(4);
}

export function renderSelection(root: HTMLElement, store: SessionStore): void {
  root.innerHTML = `
    <fieldset class="panel" id="selection-panel">
      <legend>3. Selected budget</legend>
      <div id="epsilon-star"></div>
      <div id="closeness-bars"></div>
      <div id="matrix-tabs">
        <button data-tab="raw" class="tab active">raw</button>
        <button data-tab="normalized" class="tab">normalized</button>
        <button data-tab="weighted" class="tab">weighted</button>
      </div>
      <div id="matrix-table"></div>
      <div id="selection-error" class="error" hidden>
        <span id="selection-error-text"></span>
        <button id="selection-retry">retry</button>
      </div>
    </fieldset>
  `;

  let tab: MatrixTab = "raw";
  root.querySelectorAll<HTMLButtonElement>("#matrix-tabs .tab").forEach((button) => {
    button.addEventListener("click", () => {
      tab = button.dataset.tab as MatrixTab;
      root
        .querySelectorAll("#matrix-tabs .tab")
        .forEach((b) => b.classList.toggle("active", b === button));
      redraw(store.getState());
    });
  });
  root.querySelector<HTMLButtonElement>("#selection-retry")!.addEventListener("click", () => {
    store.clearError();
    void store.submitPreferences();
  });

  function drawBars(selection: SelectionOut): string {
    const max = Math.max(...selection.closeness, 1e-12);
    return selection.matrix.alternatives
      .map((eps, i) => {
        const closeness = selection.closeness[i];
        const selected = eps === selection.epsilon_star;
        const ineligible =
          selection.cap_applied !== null && eps > selection.cap_applied;
        const width = Math.max(1, Math.round((closeness / max) * 100));
        const classes = ["bar", selected ? "selected" : "", ineligible ? "ineligible" : ""]
          .filter(Boolean)
          .join(" ");
        const label = ineligible ? " (over cap)" : selected ? " &#9733;" : "";
        return `
          <div class="bar-row" data-eps="${fmt(eps)}">
            <span class="bar-eps">&epsilon;=${fmt(eps)}</span>
            <span class="${classes}" style="width:${width}%"></span>
            <span class="bar-value" data-closeness="${fmt(closeness)}">${fmt(closeness)}${label}</span>
          </div>`;
      })
      .join("");
  }

  function drawMatrix(selection: SelectionOut): string {
    const values = matrixValues(selection.matrix, selection.weights, tab);
    const header = selection.matrix.criteria
      .map((c) => `<th>${c.name}<br><small>${c.orientation}</small></th>`)
      .join("");
    const rows = selection.matrix.alternatives
      .map((eps, i) => {
        const cells = values[i].map((x) => `<td>${tab === "raw" ? fmt(x) : shortFmt(x)}</td>`).join("");
        const expected = selection.matrix.expected_mae[i];
        return `<tr${eps === selection.epsilon_star ? ' class="selected"' : ""}>
          <td>${fmt(eps)}</td>${cells}<td>${fmt(expected)}</td></tr>`;
      })
      .join("");
    return `<table><thead><tr><th>&epsilon;</th>${header}<th>expected MAE</th></tr></thead>
      <tbody>${rows}</tbody></table>`;
  }

  function redraw(state: UiState): void {
    const badge = root.querySelector<HTMLElement>("#epsilon-star")!;
    const bars = root.querySelector<HTMLElement>("#closeness-bars")!;
    const table = root.querySelector<HTMLElement>("#matrix-table")!;
    const errorBox = root.querySelector<HTMLElement>("#selection-error")!;
    const errorText = root.querySelector<HTMLElement>("#selection-error-text")!;

    if (state.error) {
      errorBox.hidden = false;
      errorText.textContent = state.error.message;
    } else {
      errorBox.hidden = true;
    }

    // on error the previous selection stays on screen
    if (!state.selection) {
      badge.textContent = "no selection yet";
      bars.innerHTML = "";
      table.innerHTML = "";
      return;
    }
    badge.innerHTML =
      `selected &epsilon;* = <strong id="epsilon-star-value">` +
      `${fmt(state.selection.epsilon_star)}</strong>` +
      (state.selection.cap_applied !== null
        ? ` <small>(cap ${fmt(state.selection.cap_applied)} applied)</small>`
        : "");
    bars.innerHTML = drawBars(state.selection);
    table.innerHTML = drawMatrix(state.selection);
  }

  store.subscribe(redraw);
}

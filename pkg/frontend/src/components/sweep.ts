/** Epsilon-sweep chart: observed MAE with the analytic expectation overlay,
 * correlation annotations, and a marker on the currently selected epsilon.
 * Points carry tooltips with the exact server-side values. */

import { SweepOut } from "../api.js";
import { SessionStore, UiState } from "../state.js";

const WIDTH = 460;
const HEIGHT = 220;
const PAD = 36;

function scales(sweep: SweepOut) {
  const xs = sweep.grid;
  const ys = [...sweep.mae, ...sweep.expected_mae];
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMax = Math.max(...ys);
  const x = (v: number) => PAD + ((v - xMin) / (xMax - xMin || 1)) * (WIDTH - 2 * PAD);
  const y = (v: number) => HEIGHT - PAD - (v / (yMax || 1)) * (HEIGHT - 2 * PAD);
  return { x, y };
}

function polyline(points: Array<[number, number]>, cls: string): string {
  const attr = points.map(([px, py]) => `${px.toFixed(1)},${py.toFixed(1)}`).join(" ");
  return `<polyline class="${cls}" fill="none" points="${attr}"></polyline>`;
}

export function renderSweep(root: HTMLElement, store: SessionStore): void {
  root.innerHTML = `
    <fieldset class="panel" id="sweep-panel">
      <legend>5. Privacy-utility curve</legend>
      <button id="sweep-button" disabled>Run &epsilon; sweep</button>
      <span id="sweep-annotations"></span>
      <div id="sweep-chart"></div>
    </fieldset>
  `;

  const button = root.querySelector<HTMLButtonElement>("#sweep-button")!;
  button.addEventListener("click", () => {
    void store.runSweep();
  });

  function redraw(state: UiState): void {
    button.disabled = state.busy || state.upload === null;
    const annotations = root.querySelector<HTMLElement>("#sweep-annotations")!;
    const chart = root.querySelector<HTMLElement>("#sweep-chart")!;
    if (!state.sweep) {
      annotations.textContent = "";
      chart.innerHTML = "";
      return;
    }
    const sweep = state.sweep;
    annotations.textContent = [
      sweep.pearson !== null ? `pearson ${String(sweep.pearson)}` : "",
      sweep.spearman !== null ? `spearman ${String(sweep.spearman)}` : "",
    ]
      .filter(Boolean)
      .join("  ");

    const { x, y } = scales(sweep);
    const observed = sweep.grid.map((g, i) => [x(g), y(sweep.mae[i])] as [number, number]);
    const expected = sweep.grid.map(
      (g, i) => [x(g), y(sweep.expected_mae[i])] as [number, number],
    );
    const points = sweep.grid
      .map((g, i) => {
        const tooltip = `epsilon=${String(g)} mae=${String(sweep.mae[i])} expected=${String(
          sweep.expected_mae[i],
        )}`;
        return (
          `<circle class="pt" cx="${x(g).toFixed(1)}" cy="${y(sweep.mae[i]).toFixed(1)}" r="3.5"` +
          ` data-mae="${String(sweep.mae[i])}"><title>${tooltip}</title></circle>`
        );
      })
      .join("");

    const marker =
      state.selection !== null && sweep.grid.includes(state.selection.epsilon_star)
        ? `<line class="marker" x1="${x(state.selection.epsilon_star).toFixed(1)}" y1="${PAD}"` +
          ` x2="${x(state.selection.epsilon_star).toFixed(1)}" y2="${HEIGHT - PAD}"></line>`
        : "";

    chart.innerHTML = `
      <svg viewBox="0 0 ${WIDTH} ${HEIGHT}" width="${WIDTH}" height="${HEIGHT}" role="img">
        <line class="axis" x1="${PAD}" y1="${HEIGHT - PAD}" x2="${WIDTH - PAD}" y2="${HEIGHT - PAD}"></line>
        <line class="axis" x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${HEIGHT - PAD}"></line>
        ${polyline(expected, "expected-line")}
        ${polyline(observed, "observed-line")}
        ${points}
        ${marker}
      </svg>
      <small>solid: observed MAE (${sweep.units}); dashed: expected &Delta;f/&epsilon;;
      ${sweep.seeds_per_point} seeds/point</small>
    `;
  }

  store.subscribe(redraw);
}

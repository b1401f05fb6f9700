/** Preference sliders. The PUT fires on slider release (change event),
 * debounced so a burst of adjustments produces one request. */

import { SLIDER_RANGES, SessionStore, SliderName } from "../state.js";

const DEBOUNCE_MS = 150;

export function renderSliders(root: HTMLElement, store: SessionStore): void {
  root.innerHTML = `
    <fieldset class="panel" id="slider-panel">
      <legend>2. Priorities</legend>
      <label>Privacy <span id="privacy-value"></span>
        <input id="privacy-slider" type="range" min="1" max="5" step="1">
      </label>
      <label>Accuracy <span id="accuracy-value"></span>
        <input id="accuracy-slider" type="range" min="1" max="5" step="1">
      </label>
      <label>Data sensitivity <span id="sensitivity-value"></span>
        <input id="sensitivity-slider" type="range" min="1" max="3" step="1">
      </label>
      <label>Legal compliance required
        <input id="compliance-toggle" type="checkbox">
      </label>
      <span id="slider-status" class="status"></span>
    </fieldset>
  `;

  let timer: ReturnType<typeof setTimeout> | null = null;
  const submit = () => {
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      void store.submitPreferences();
    }, DEBOUNCE_MS);
  };

  for (const name of Object.keys(SLIDER_RANGES) as SliderName[]) {
    const input = root.querySelector<HTMLInputElement>(`#${name}-slider`)!;
    input.addEventListener("input", () => {
      store.setSlider(name, Number(input.value));
    });
    input.addEventListener("change", submit);
  }
  const toggle = root.querySelector<HTMLInputElement>("#compliance-toggle")!;
  toggle.addEventListener("change", () => {
    store.setCompliance(toggle.checked);
    submit();
  });

  store.subscribe((state) => {
    for (const name of Object.keys(SLIDER_RANGES) as SliderName[]) {
      const input = root.querySelector<HTMLInputElement>(`#${name}-slider`)!;
      const label = root.querySelector<HTMLElement>(`#${name}-value`)!;
      input.value = String(state.sliders[name]);
      label.textContent = String(state.sliders[name]);
      input.disabled = state.busy || state.upload === null;
    }
    toggle.checked = state.sliders.compliance;
    toggle.disabled = state.busy || state.upload === null;
    const status = root.querySelector<HTMLElement>("#slider-status")!;
    status.textContent = state.upload === null ? "upload a dataset to begin" : "";
  });
}

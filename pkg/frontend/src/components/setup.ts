/** Session setup: pick a policy, choose clamp bounds, upload a CSV. */

import { ApiClient } from "../api.js";
import { SessionStore } from "../state.js";

export function renderSetup(root: HTMLElement, store: SessionStore, api: ApiClient): void {
  root.innerHTML = `
    <fieldset class="panel" id="setup-panel">
      <legend>1. Dataset & policy</legend>
      <label>Compliance policy
        <select id="policy-select"><option value="">(none)</option></select>
      </label>
      <label>Clamp lower <input id="bound-lower" type="number" value="0" step="any"></label>
      <label>Clamp upper <input id="bound-upper" type="number" value="10000" step="any"></label>
      <label>CSV file <input id="csv-file" type="file" accept=".csv,text/csv"></label>
      <button id="start-session">Start session & upload</button>
      <span id="upload-status" class="status"></span>
    </fieldset>
  `;

  const policySelect = root.querySelector<HTMLSelectElement>("#policy-select")!;
  const status = root.querySelector<HTMLElement>("#upload-status")!;

  api
    .listPolicies()
    .then((policies) => {
      for (const policy of policies) {
        const option = document.createElement("option");
        option.value = policy.name;
        option.textContent = `${policy.name} (cap ${String(policy.epsilon_cap)})`;
        policySelect.appendChild(option);
      }
    })
    .catch(() => {
      status.textContent = "could not load policies";
    });

  root.querySelector<HTMLButtonElement>("#start-session")!.addEventListener("click", async () => {
    const fileInput = root.querySelector<HTMLInputElement>("#csv-file")!;
    const file = fileInput.files?.[0];
    if (!file) {
      status.textContent = "choose a CSV file first";
      return;
    }
    const lower = Number(root.querySelector<HTMLInputElement>("#bound-lower")!.value);
    const upper = Number(root.querySelector<HTMLInputElement>("#bound-upper")!.value);
    const policyName = policySelect.value || undefined;

    status.textContent = "uploading...";
    const session = await store.createSession(policyName);
    if (!session) {
      status.textContent = store.getState().error?.message ?? "session creation failed";
      return;
    }
    const text = await file.text();
    const upload = await store.uploadCsv(text, lower, upper);
    status.textContent = upload
      ? `uploaded ${upload.shape[0]} series x ${upload.shape[1]} timestamps ` +
        `(sensitivity ${String(upload.delta_f)})`
      : store.getState().error?.message ?? "upload failed";
  });
}

/** Session state for the UI.
 *
 * Two rules are load-bearing here:
 *  - privacy quantities (epsilon*, closeness, MAE, scores, budget) are stored
 *    verbatim from server responses and never recomputed client-side;
 *  - slider setters clamp into the legal ranges, so an out-of-range
 *    preferences request cannot be constructed.
 */

import {
  ApiClient,
  ApiRequestError,
  PreferencesIn,
  ReleaseOut,
  SelectionOut,
  SessionOut,
  SweepOut,
  UploadOut,
} from "./api.js";

export const SLIDER_RANGES = {
  privacy: [1, 5],
  accuracy: [1, 5],
  sensitivity: [1, 3],
} as const;

export type SliderName = keyof typeof SLIDER_RANGES;

export interface Sliders {
  privacy: number;
  accuracy: number;
  compliance: boolean;
  sensitivity: number;
}

export interface BudgetGauge {
  total: number;
  remaining: number;
}

export type FeedEntry =
  | { kind: "utility"; versionId: number; seed: number; utility: ReleaseOut["utility"] }
  | { kind: "impact"; impact: ReleaseOut["impact"] };

export interface UiState {
  sessionId: string | null;
  policyCap: number | null;
  upload: UploadOut | null;
  sliders: Sliders;
  selection: SelectionOut | null;
  budget: BudgetGauge | null;
  feed: readonly FeedEntry[];
  sweep: SweepOut | null;
  busy: boolean;
  error: { message: string; retryable: boolean } | null;
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, Math.round(value)));
}

const INITIAL: UiState = {
  sessionId: null,
  policyCap: null,
  upload: null,
  sliders: { privacy: 3, accuracy: 3, compliance: false, sensitivity: 2 },
  selection: null,
  budget: null,
  feed: [],
  sweep: null,
  busy: false,
  error: null,
};

export class SessionStore {
  private state: UiState = { ...INITIAL };
  private listeners: Array<(state: UiState) => void> = [];

  constructor(private readonly api: ApiClient) {}

  getState(): UiState {
    return this.state;
  }

  subscribe(listener: (state: UiState) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private setState(patch: Partial<UiState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  /** Clamped slider update; never produces an out-of-range value. */
  setSlider(name: SliderName, value: number): void {
    const [lo, hi] = SLIDER_RANGES[name];
    this.setState({
      sliders: { ...this.state.sliders, [name]: clamp(value, lo, hi) },
    });
  }

  setCompliance(on: boolean): void {
    this.setState({ sliders: { ...this.state.sliders, compliance: on } });
  }

  /** The only way a preferences payload is built; values are pre-clamped. */
  preferencesPayload(): PreferencesIn {
    const { privacy, accuracy, compliance, sensitivity } = this.state.sliders;
    return {
      privacy,
      accuracy,
      compliance_required: compliance,
      sensitivity,
    };
  }

  private async mutate<T>(operation: () => Promise<T>, apply: (result: T) => Partial<UiState>): Promise<T | null> {
    if (this.state.busy) {
      return null; // one in-flight mutating request at a time
    }
    this.setState({ busy: true, error: null });
    try {
      const result = await operation();
      this.setState({ busy: false, ...apply(result) });
      return result;
    } catch (error) {
      // prior selection and feed stay untouched; surface the error inline
      const message = error instanceof Error ? error.message : String(error);
      const retryable = error instanceof ApiRequestError ? error.retryable : false;
      this.setState({ busy: false, error: { message, retryable } });
      return null;
    }
  }

  async createSession(policyName?: string): Promise<SessionOut | null> {
    return this.mutate(
      () => this.api.createSession(undefined, policyName),
      (session) => ({
        sessionId: session.session_id,
        policyCap: session.policy?.epsilon_cap ?? null,
        budget: { total: session.total_budget, remaining: session.remaining },
      }),
    );
  }

  async uploadCsv(csvText: string, lower: number, upper: number): Promise<UploadOut | null> {
    const sessionId = this.requireSession();
    return this.mutate(
      () => this.api.uploadDataset(sessionId, csvText, lower, upper),
      (upload) => ({ upload }),
    );
  }

  async submitPreferences(): Promise<SelectionOut | null> {
    const sessionId = this.requireSession();
    const payload = this.preferencesPayload();
    return this.mutate(
      () => this.api.setPreferences(sessionId, payload),
      (selection) => ({ selection }),
    );
  }

  async release(seed?: number): Promise<ReleaseOut | null> {
    const sessionId = this.requireSession();
    return this.mutate(
      () => this.api.release(sessionId, seed),
      (outcome) => ({
        // gauge reconciles to the server's remaining budget, verbatim
        budget: this.state.budget
          ? { total: this.state.budget.total, remaining: outcome.remaining_budget }
          : null,
        feed: [
          ...this.state.feed,
          {
            kind: "utility",
            versionId: outcome.version.version_id,
            seed: outcome.seed,
            utility: outcome.utility,
          },
          { kind: "impact", impact: outcome.impact },
        ],
      }),
    );
  }

  async runSweep(grid?: number[], seedsPerPoint?: number): Promise<SweepOut | null> {
    const sessionId = this.requireSession();
    return this.mutate(
      () => this.api.sweep(sessionId, grid, seedsPerPoint),
      (sweep) => ({ sweep }),
    );
  }

  /** One-click refinement: move the sliders, then re-run selection. */
  async applySuggestion(change: Record<string, number>): Promise<SelectionOut | null> {
    for (const [name, value] of Object.entries(change)) {
      if (name === "privacy" || name === "accuracy" || name === "sensitivity") {
        this.setSlider(name, value);
      }
    }
    return this.submitPreferences();
  }

  clearError(): void {
    this.setState({ error: null });
  }

  private requireSession(): string {
    if (this.state.sessionId === null) {
      throw new Error("no session created yet");
    }
    return this.state.sessionId;
  }
}

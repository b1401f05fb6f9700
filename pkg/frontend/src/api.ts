/** Typed client for the civicdp HTTP API. Mirrors the server wire formats
 * exactly; every number shown in the UI comes from these payloads. */

export interface PolicyOut {
  name: string;
  epsilon_cap: number;
  description: string;
}

export interface SessionOut {
  session_id: string;
  total_budget: number;
  spent: number;
  remaining: number;
  policy: PolicyOut | null;
}

export interface UploadOut {
  version_id: number;
  shape: [number, number];
  delta_f: number;
}

export interface PreferencesIn {
  privacy: number;
  accuracy: number;
  compliance_required: boolean;
  sensitivity: number;
}

export interface CriterionOut {
  name: string;
  orientation: "benefit" | "cost";
}

export interface MatrixOut {
  alternatives: number[];
  criteria: CriterionOut[];
  values: number[][];
  expected_mae: number[];
}

export interface WeightsOut {
  privacy: number;
  accuracy: number;
  compliance: number;
  sensitivity: number;
}

export interface SelectionOut {
  epsilon_star: number;
  closeness: number[];
  d_plus: number[];
  d_minus: number[];
  cap_applied: number | null;
  weights: WeightsOut;
  matrix: MatrixOut;
}

export interface VersionOut {
  version_id: number;
  parent_id: number | null;
  shape: [number, number];
  epsilon_used: number | null;
  seed: number | null;
  mechanism: string | null;
}

export interface UtilityOut {
  epsilon: number;
  mae: number;
  expected_mae: number;
  per_series_mae: number[];
  max_abs_error: number;
}

export interface SuggestionOut {
  description: string;
  suggested_profile_change: Record<string, number>;
}

export interface ImpactOut {
  privacy_score: number;
  narrative: string;
  caveats: string[];
  refinement_suggestions: SuggestionOut[];
  provider: string;
}

export interface ReleaseOut {
  version: VersionOut;
  utility: UtilityOut;
  impact: ImpactOut;
  seed: number;
  remaining_budget: number;
}

export interface SweepOut {
  grid: number[];
  mae: number[];
  expected_mae: number[];
  pearson: number | null;
  spearman: number | null;
  seeds_per_point: number;
  units: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  retryable: boolean;
}

export class ApiRequestError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly retryable: boolean,
    readonly status: number,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => globalThis.fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      if (typeof body === "string") {
        init.body = body;
        init.headers = { "Content-Type": "text/csv" };
      } else {
        init.body = JSON.stringify(body);
        init.headers = { "Content-Type": "application/json" };
      }
    }
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let parsed: Partial<ApiErrorBody> = {};
      try {
        parsed = (await response.json()) as ApiErrorBody;
      } catch {
        // non-JSON error body; keep defaults
      }
      throw new ApiRequestError(
        parsed.code ?? "http_error",
        parsed.message ?? `request failed with status ${response.status}`,
        parsed.retryable ?? false,
        response.status,
      );
    }
    return (await response.json()) as T;
  }

  listPolicies(): Promise<PolicyOut[]> {
    return this.request("GET", "/api/policies");
  }

  createSession(totalBudget?: number, policyName?: string): Promise<SessionOut> {
    return this.request("POST", "/api/sessions", {
      total_budget: totalBudget ?? null,
      policy_name: policyName ?? null,
    });
  }

  uploadDataset(
    sessionId: string,
    csvText: string,
    lower: number,
    upper: number,
  ): Promise<UploadOut> {
    const params = new URLSearchParams({ lower: String(lower), upper: String(upper) });
    return this.request("POST", `/api/sessions/${sessionId}/dataset?${params}`, csvText);
  }

  setPreferences(sessionId: string, prefs: PreferencesIn): Promise<SelectionOut> {
    return this.request("PUT", `/api/sessions/${sessionId}/preferences`, prefs);
  }

  release(sessionId: string, seed?: number): Promise<ReleaseOut> {
    return this.request("POST", `/api/sessions/${sessionId}/release`, {
      seed: seed ?? null,
    });
  }

  sweep(sessionId: string, grid?: number[], seedsPerPoint?: number): Promise<SweepOut> {
    return this.request("POST", `/api/sessions/${sessionId}/sweep`, {
      grid: grid ?? null,
      seeds_per_point: seedsPerPoint ?? null,
    });
  }
}

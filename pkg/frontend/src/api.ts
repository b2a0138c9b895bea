/** Typed client for the pipeline service HTTP API. */

export type JobStatus = "Queued" | "Running" | "Succeeded" | "Failed" | "Cancelled";

export const TERMINAL_STATUSES: ReadonlySet<JobStatus> = new Set([
  "Succeeded",
  "Failed",
  "Cancelled",
]);

export interface ResultPayload {
  columns: { name: string; type: string }[];
  rows: (string | number | boolean | null)[][];
  total_rows: number;
  page_size: number;
  branches_run: string[];
  timings_ms: Record<string, number>;
  model_summary: unknown;
}

export interface JobSnapshot {
  id: string;
  status: JobStatus;
  submitted_at: string;
  finished_at: string | null;
  error: string | null;
  error_code: string | null;
  result: ResultPayload | null;
}

export interface ApiError {
  code: string;
  message: string;
}

export class ServiceError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, body: ApiError) {
    super(body.message);
    this.code = body.code;
    this.status = status;
  }
}

export interface ConsoleApi {
  submitPipeline(mlConfig: string, dbConfig: string): Promise<{ id: string }>;
  getPipeline(id: string): Promise<JobSnapshot>;
  cancelPipeline(id: string): Promise<JobSnapshot>;
  fetchResultCsv(id: string): Promise<string>;
}

async function parseError(response: Response): Promise<ServiceError> {
  let body: ApiError = { code: "unknown", message: `HTTP ${response.status}` };
  try {
    const parsed = await response.json();
    if (parsed && typeof parsed.message === "string") {
      body = parsed as ApiError;
    }
  } catch {
    // non-JSON error body; keep the fallback
  }
  return new ServiceError(response.status, body);
}

export function createApi(baseUrl = ""): ConsoleApi {
  async function request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(baseUrl + path, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  return {
    submitPipeline(mlConfig, dbConfig) {
      return request<{ id: string }>("/pipelines", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ ml_config: mlConfig, db_config: dbConfig }),
      });
    },
    getPipeline(id) {
      return request<JobSnapshot>(`/pipelines/${id}`);
    },
    cancelPipeline(id) {
      return request<JobSnapshot>(`/pipelines/${id}/cancel`, { method: "POST" });
    },
    async fetchResultCsv(id) {
      const response = await fetch(`${baseUrl}/pipelines/${id}/result.csv`);
      if (!response.ok) {
        throw await parseError(response);
      }
      return response.text();
    },
  };
}

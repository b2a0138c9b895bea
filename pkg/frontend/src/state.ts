/** Console state machine.
 *
 * The UI mirrors the server-side job lifecycle: while a job is active the
 * Run button stays disabled, and Save only unlocks once a Succeeded job's
 * results are loaded into the results pane.
 */
import type { JobStatus, ResultPayload } from "./api.js";
import { TERMINAL_STATUSES } from "./api.js";

export interface ConsoleState {
  mlConfigText: string;
  dbConfigText: string;
  activeJob: string | null;
  jobStatus: JobStatus | null;
  resultsView: ResultPayload | null;
  resultsJob: string | null;
  statusLine: string;
  errorLine: string | null;
}

export function initialState(): ConsoleState {
  return {
    mlConfigText: "",
    dbConfigText: "",
    activeJob: null,
    jobStatus: null,
    resultsView: null,
    resultsJob: null,
    statusLine: "idle",
    errorLine: null,
  };
}

export function jobActive(state: ConsoleState): boolean {
  return state.activeJob !== null && !(state.jobStatus && TERMINAL_STATUSES.has(state.jobStatus));
}

export function canRun(state: ConsoleState): boolean {
  return (
    !jobActive(state) &&
    state.mlConfigText.trim().length > 0 &&
    state.dbConfigText.trim().length > 0
  );
}

export function canSave(state: ConsoleState): boolean {
  return state.resultsView !== null && state.jobStatus === "Succeeded";
}

export function clearAll(state: ConsoleState): ConsoleState {
  // The Save/Cancel buttons empty every text box and the results pane; the
  // job itself persists server-side.
  return {
    ...initialState(),
    statusLine: "cleared",
  };
}

export function withSubmitted(state: ConsoleState, jobId: string): ConsoleState {
  return {
    ...state,
    activeJob: jobId,
    jobStatus: "Queued",
    resultsView: null,
    resultsJob: null,
    statusLine: `job ${jobId}: Queued`,
    errorLine: null,
  };
}

export function withPolled(
  state: ConsoleState,
  status: JobStatus,
  result: ResultPayload | null,
  error: string | null,
): ConsoleState {
  return {
    ...state,
    jobStatus: status,
    resultsView: status === "Succeeded" ? result : null,
    resultsJob: status === "Succeeded" ? state.activeJob : null,
    statusLine: `job ${state.activeJob}: ${status}`,
    errorLine: status === "Failed" ? error : null,
  };
}

export function withError(state: ConsoleState, message: string): ConsoleState {
  return { ...state, errorLine: message, statusLine: "error" };
}

/** DOM wiring for the analyst console.
 *
 * The console owns two config editors, Run/Save/Cancel buttons, a status
 * line, and the results pane. All API calls go through an injected client
 * so tests can drive the console against a fake backend; the poll delay and
 * the file-download hook are injectable for the same reason.
 */
import type { ConsoleApi, ResultPayload } from "./api.js";
import { ServiceError, TERMINAL_STATUSES } from "./api.js";
import {
  ConsoleState,
  canRun,
  canSave,
  clearAll,
  initialState,
  jobActive,
  withError,
  withPolled,
  withSubmitted,
} from "./state.js";

export interface ConsoleOptions {
  api: ConsoleApi;
  /** Await between polls; defaults to a real timer with backoff. */
  delay?: (ms: number) => Promise<void>;
  /** Download hook; defaults to an anchor-click blob download. */
  download?: (filename: string, text: string) => void;
  pollIntervalMs?: number;
  pollBackoff?: number;
  maxPollIntervalMs?: number;
}

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

function blobDownload(filename: string, text: string): void {
  const blob = new Blob([text], { type: "text/csv" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  document.body.appendChild(anchor);
  anchor.click();
  anchor.remove();
  URL.revokeObjectURL(url);
}

export class Console {
  state: ConsoleState = initialState();
  private readonly api: ConsoleApi;
  private readonly delay: (ms: number) => Promise<void>;
  private readonly download: (filename: string, text: string) => void;
  private readonly pollIntervalMs: number;
  private readonly pollBackoff: number;
  private readonly maxPollIntervalMs: number;

  readonly mlEditor: HTMLTextAreaElement;
  readonly dbEditor: HTMLTextAreaElement;
  readonly runButton: HTMLButtonElement;
  readonly saveButton: HTMLButtonElement;
  readonly cancelButton: HTMLButtonElement;
  readonly statusLine: HTMLElement;
  readonly errorBanner: HTMLElement;
  readonly resultsPane: HTMLElement;

  constructor(root: HTMLElement, options: ConsoleOptions) {
    this.api = options.api;
    this.delay = options.delay ?? sleep;
    this.download = options.download ?? blobDownload;
    this.pollIntervalMs = options.pollIntervalMs ?? 500;
    this.pollBackoff = options.pollBackoff ?? 1.5;
    this.maxPollIntervalMs = options.maxPollIntervalMs ?? 5000;

    root.innerHTML = `
      <div class="editors">
        <label>Configuration of Machine Learning
          <input type="file" data-role="ml-file" accept=".xml" />
          <textarea data-role="ml-config" rows="12" spellcheck="false"></textarea>
        </label>
        <label>Configuration of Relation Database
          <input type="file" data-role="db-file" accept=".xml" />
          <textarea data-role="db-config" rows="12" spellcheck="false"></textarea>
        </label>
      </div>
      <div class="controls">
        <button data-role="run">Run</button>
        <button data-role="save">Save</button>
        <button data-role="cancel">Cancel</button>
        <span data-role="status" class="status"></span>
      </div>
      <div data-role="error" class="error" hidden></div>
      <div data-role="results" class="results"></div>
    `;
    this.mlEditor = root.querySelector<HTMLTextAreaElement>('[data-role="ml-config"]')!;
    this.dbEditor = root.querySelector<HTMLTextAreaElement>('[data-role="db-config"]')!;
    this.runButton = root.querySelector<HTMLButtonElement>('[data-role="run"]')!;
    this.saveButton = root.querySelector<HTMLButtonElement>('[data-role="save"]')!;
    this.cancelButton = root.querySelector<HTMLButtonElement>('[data-role="cancel"]')!;
    this.statusLine = root.querySelector<HTMLElement>('[data-role="status"]')!;
    this.errorBanner = root.querySelector<HTMLElement>('[data-role="error"]')!;
    this.resultsPane = root.querySelector<HTMLElement>('[data-role="results"]')!;

    this.mlEditor.addEventListener("input", () => this.syncEditors());
    this.dbEditor.addEventListener("input", () => this.syncEditors());
    this.runButton.addEventListener("click", () => void this.runClicked());
    this.saveButton.addEventListener("click", () => void this.saveClicked());
    this.cancelButton.addEventListener("click", () => void this.cancelClicked());
    this.wireFileInput('[data-role="ml-file"]', root, (text) => {
      this.mlEditor.value = text;
      this.syncEditors();
    });
    this.wireFileInput('[data-role="db-file"]', root, (text) => {
      this.dbEditor.value = text;
      this.syncEditors();
    });
    this.render();
  }

  private wireFileInput(selector: string, root: HTMLElement, apply: (text: string) => void): void {
    const input = root.querySelector<HTMLInputElement>(selector)!;
    input.addEventListener("change", () => {
      const file = input.files?.[0];
      if (!file) return;
      void file.text().then(apply);
    });
  }

  private syncEditors(): void {
    this.state = {
      ...this.state,
      mlConfigText: this.mlEditor.value,
      dbConfigText: this.dbEditor.value,
    };
    this.render();
  }

  private setState(state: ConsoleState): void {
    this.state = state;
    this.render();
  }

  async runClicked(): Promise<void> {
    if (!canRun(this.state)) {
      return; // button is disabled; guard against programmatic calls
    }
    let jobId: string;
    try {
      const submitted = await this.api.submitPipeline(
        this.state.mlConfigText,
        this.state.dbConfigText,
      );
      jobId = submitted.id;
    } catch (error) {
      this.setState(withError(this.state, describeError(error)));
      return;
    }
    this.setState(withSubmitted(this.state, jobId));
    let interval = this.pollIntervalMs;
    while (true) {
      try {
        const job = await this.api.getPipeline(jobId);
        this.setState(withPolled(this.state, job.status, job.result, job.error));
        if (TERMINAL_STATUSES.has(job.status)) {
          return;
        }
      } catch (error) {
        this.setState(withError(this.state, describeError(error)));
        return;
      }
      await this.delay(interval);
      interval = Math.min(interval * this.pollBackoff, this.maxPollIntervalMs);
    }
  }

  async saveClicked(): Promise<void> {
    if (!canSave(this.state) || this.state.resultsJob === null) {
      return;
    }
    const jobId = this.state.resultsJob;
    let csv: string;
    try {
      csv = await this.api.fetchResultCsv(jobId);
    } catch (error) {
      this.setState(withError(this.state, describeError(error)));
      return;
    }
    this.download(`${jobId}.csv`, csv);
    this.mlEditor.value = "";
    this.dbEditor.value = "";
    this.setState(clearAll(this.state));
  }

  async cancelClicked(): Promise<void> {
    if (jobActive(this.state) && this.state.activeJob !== null) {
      try {
        await this.api.cancelPipeline(this.state.activeJob);
      } catch {
        // clearing proceeds either way; the poll loop sees the outcome
      }
    }
    this.mlEditor.value = "";
    this.dbEditor.value = "";
    this.setState(clearAll(this.state));
  }

  render(): void {
    this.runButton.disabled = !canRun(this.state);
    this.saveButton.disabled = !canSave(this.state);
    this.statusLine.textContent = this.state.statusLine;
    if (this.state.errorLine) {
      this.errorBanner.hidden = false;
      this.errorBanner.textContent = this.state.errorLine;
    } else {
      this.errorBanner.hidden = true;
      this.errorBanner.textContent = "";
    }
    this.renderResults();
  }

  private renderResults(): void {
    const view = this.state.resultsView;
    this.resultsPane.innerHTML = "";
    if (!view) {
      return;
    }
    const info = document.createElement("p");
    info.className = "results-info";
    const shown = view.rows.length;
    info.textContent =
      shown < view.total_rows
        ? `showing ${shown} of ${view.total_rows} rows`
        : `${view.total_rows} rows`;
    this.resultsPane.appendChild(info);

    const table = document.createElement("table");
    const thead = document.createElement("thead");
    const headRow = document.createElement("tr");
    for (const column of view.columns) {
      const th = document.createElement("th");
      th.textContent = column.name;
      th.title = column.type;
      headRow.appendChild(th);
    }
    thead.appendChild(headRow);
    table.appendChild(thead);
    const tbody = document.createElement("tbody");
    for (const row of view.rows) {
      const tr = document.createElement("tr");
      for (const value of row) {
        const td = document.createElement("td");
        td.textContent = value === null ? "" : String(value);
        tr.appendChild(td);
      }
      tbody.appendChild(tr);
    }
    table.appendChild(tbody);
    this.resultsPane.appendChild(table);
    if (shown < view.total_rows) {
      const note = document.createElement("p");
      note.className = "pagination-note";
      note.textContent = "download the CSV for the full result";
      this.resultsPane.appendChild(note);
    }
  }
}

function describeError(error: unknown): string {
  if (error instanceof ServiceError) {
    return `${error.code}: ${error.message}`;
  }
  if (error instanceof Error) {
    return error.message;
  }
  return String(error);
}

export function mountConsole(root: HTMLElement, options: ConsoleOptions): Console {
  return new Console(root, options);
}

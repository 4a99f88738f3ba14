/** DOM shell: sentence input (typed or mic), term table with audio and
 * candidate columns, ordered selection badges, compose with progress,
 * previews and download. All state transitions go through state.ts. */

import { StudioClient } from "./api";
import { pollJob, PollHandle } from "./polling";
import {
  anySelection,
  applyJob,
  badges,
  initialState,
  rowsFromResponse,
  submitEnabled,
  toggleSelection,
  UiState,
  updateRow,
} from "./state";
import { ApiError } from "./types";

export class StudioApp {
  state: UiState = initialState();
  private poll: PollHandle | null = null;
  private inFlight = false;

  constructor(
    private root: HTMLElement,
    private client: StudioClient,
    private media: { getUserMedia?: boolean } = {
      getUserMedia:
        typeof navigator !== "undefined" && !!navigator.mediaDevices?.getUserMedia,
    },
    private sleeper?: (ms: number) => Promise<void>,
  ) {
    this.render();
  }

  // --- actions -----------------------------------------------------------

  async submitSentence(text: string): Promise<void> {
    if (!submitEnabled(text) || this.inFlight) {
      return;
    }
    this.inFlight = true;
    this.state = { ...initialState(), phase: "extracting" };
    this.render();
    try {
      const session = await this.client.createSession({ text });
      const rows = await this.client.extractTerms(session.session_id);
      this.state = {
        ...this.state,
        phase: "table",
        sessionId: session.session_id,
        rows: rowsFromResponse(rows),
        error: null,
      };
    } catch (err) {
      this.state = {
        ...initialState(),
        phase: "idle",
        error: describeError(err),
      };
    } finally {
      this.inFlight = false;
      this.render();
    }
  }

  async submitAudioRef(audioRef: string): Promise<void> {
    if (!audioRef || this.inFlight) {
      return;
    }
    this.inFlight = true;
    this.state = { ...initialState(), phase: "extracting" };
    this.render();
    try {
      const session = await this.client.createSession({ audio_ref: audioRef });
      const rows = await this.client.extractTerms(session.session_id);
      this.state = {
        ...this.state,
        phase: "table",
        sessionId: session.session_id,
        rows: rowsFromResponse(rows),
      };
    } catch (err) {
      this.state = { ...initialState(), phase: "idle", error: describeError(err) };
    } finally {
      this.inFlight = false;
      this.render();
    }
  }

  /** Optimistic toggle; the server's 422 reverts to the pre-click state. */
  async onToggle(term: string, assetId: string): Promise<void> {
    const row = this.state.rows.find((r) => r.term === term);
    const sessionId = this.state.sessionId;
    if (!row || !sessionId) {
      return;
    }
    const previous = row;
    const next = toggleSelection(row, assetId);
    this.state = updateRow(this.state, term, next);
    this.render();
    try {
      await this.client.putSelection(sessionId, term, next.selected);
    } catch (err) {
      this.state = updateRow(this.state, term, previous);
      this.state = { ...this.state, error: describeError(err) };
      this.render();
    }
  }

  async createVideo(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId || !anySelection(this.state)) {
      return;
    }
    this.state = { ...this.state, phase: "composing", progress: 0, error: null };
    this.render();
    let jobId: string;
    try {
      const response = await this.client.composeVideo(sessionId);
      jobId = response.job_id;
    } catch (err) {
      const already =
        err instanceof ApiError && err.status === 409
          ? "a video is already being created"
          : describeError(err);
      this.state = { ...this.state, phase: "table", error: already };
      this.render();
      return;
    }
    this.state = { ...this.state, jobId };
    this.poll = pollJob(
      this.client,
      jobId,
      (job) => {
        this.state = applyJob(this.state, job);
        this.render();
      },
      this.sleeper,
    );
    try {
      const job = await this.poll.done;
      if (job.state === "done") {
        await this.loadPreviews();
      }
    } catch (err) {
      this.state = { ...this.state, phase: "failed", error: describeError(err) };
    }
    this.render();
  }

  private async loadPreviews(): Promise<void> {
    if (!this.state.sessionId) {
      return;
    }
    const silent = await this.client.downloadVideo(this.state.sessionId, "silent");
    const final = await this.client.downloadVideo(this.state.sessionId, "final");
    this.state = {
      ...this.state,
      previews: { silent: silent.url, final: final.url },
      downloadEnabled: true,
    };
  }

  cancelPolling(): void {
    this.poll?.cancel();
    this.poll = null;
  }

  // --- rendering ----------------------------------------------------------

  render(): void {
    this.root.replaceChildren(
      this.renderInput(),
      this.renderError(),
      this.renderTable(),
      this.renderCompose(),
    );
  }

  private renderInput(): HTMLElement {
    const form = el("form", { class: "sentence-form" });
    const input = el("input", {
      type: "text",
      id: "sentence-input",
      placeholder: "Type a sentence",
    }) as HTMLInputElement;
    const submit = el("button", { type: "submit", id: "submit-btn" }, "Extract Terms");
    submit.toggleAttribute("disabled", true);
    input.addEventListener("input", () => {
      submit.toggleAttribute("disabled", !submitEnabled(input.value));
    });
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitSentence(input.value);
    });
    form.append(input, submit);
    if (this.media.getUserMedia) {
      const mic = el("button", { type: "button", id: "mic-btn" }, "🎤");
      mic.addEventListener("click", () => {
        void import("./mic").then(async ({ captureWavDataUrl }) => {
          mic.toggleAttribute("disabled", true);
          try {
            await this.submitAudioRef(await captureWavDataUrl());
          } finally {
            mic.toggleAttribute("disabled", false);
          }
        });
      });
      form.append(mic);
    }
    return form;
  }

  private renderError(): HTMLElement {
    const box = el("div", { id: "error-box", role: "alert" });
    if (this.state.error) {
      box.append(el("span", {}, this.state.error));
      box.append(el("button", { type: "button", id: "retry-btn" }, "Retry"));
    } else {
      box.style.display = "none";
    }
    return box;
  }

  private renderTable(): HTMLElement {
    const table = el("table", { id: "term-table" });
    if (this.state.phase === "idle" || this.state.rows.length === 0) {
      table.style.display = this.state.phase === "table" ? "" : "none";
    }
    const header = el("tr", {});
    header.append(el("th", {}, "Term"), el("th", {}, "Audio"), el("th", {}, "Images"));
    table.append(header);
    for (const row of this.state.rows) {
      const tr = el("tr", { "data-term": row.term });
      tr.append(el("td", { class: "term-cell" }, row.term));
      const audioCell = el("td", { class: "audio-cell" });
      if (row.audio) {
        const audio = el("audio", {
          controls: "true",
          src: row.audio.dataUrl,
        });
        audioCell.append(audio);
      } else {
        audioCell.append(el("span", { class: "no-audio" }, "—"));
      }
      tr.append(audioCell);
      const imgCell = el("td", { class: "image-cell" });
      const badgeMap = badges(row);
      for (const candidate of row.candidates) {
        const wrapper = el("span", {
          class: badgeMap.has(candidate.assetId)
            ? "thumb selected"
            : "thumb",
          "data-asset": candidate.assetId,
        });
        const img = el("img", { src: candidate.dataUrl, width: "64" });
        img.addEventListener("click", () => {
          void this.onToggle(row.term, candidate.assetId);
        });
        wrapper.append(img);
        const badge = badgeMap.get(candidate.assetId);
        if (badge !== undefined) {
          wrapper.append(el("span", { class: "badge" }, String(badge)));
        }
        imgCell.append(wrapper);
      }
      tr.append(imgCell);
      table.append(tr);
    }
    return table;
  }

  private renderCompose(): HTMLElement {
    const area = el("div", { id: "compose-area" });
    const create = el("button", { type: "button", id: "create-btn" }, "Create Video");
    create.toggleAttribute(
      "disabled",
      !anySelection(this.state) || this.state.phase === "composing",
    );
    create.addEventListener("click", () => void this.createVideo());
    area.append(create);

    if (this.state.phase === "composing" || this.state.phase === "done") {
      const bar = el("progress", {
        id: "job-progress",
        max: "1",
        value: String(this.state.progress),
      });
      area.append(bar, el("span", { id: "phase-label" }, this.state.phase));
    }
    if (this.state.phase === "done") {
      if (this.state.previews.silent) {
        area.append(
          el("video", { id: "silent-preview", controls: "true",
                        src: this.state.previews.silent }),
        );
      }
      if (this.state.previews.final) {
        area.append(
          el("video", { id: "final-preview", controls: "true",
                        src: this.state.previews.final }),
        );
      }
      const download = el(
        "a",
        { id: "download-link", href: this.state.previews.final ?? "#" },
        "Download",
      );
      if (!this.state.downloadEnabled) {
        download.setAttribute("aria-disabled", "true");
      }
      area.append(download);
    }
    if (this.state.phase === "failed" && this.state.error) {
      area.append(el("div", { id: "job-error" }, this.state.error));
    }
    return area;
  }
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return `${err.code}: ${err.message}`;
  }
  return err instanceof Error ? err.message : String(err);
}

function el(
  tag: string,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") {
      node.className = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

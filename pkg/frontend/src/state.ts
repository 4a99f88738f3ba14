/** Pure view-state core: rendering is a function of the last server snapshot
 * plus pending local edits, so every transition here is unit-testable. */

import { JobView, TermRowResponse } from "./types";

export interface TermRowState {
  term: string;
  audio: { assetId: string; duration: number; dataUrl: string } | null;
  candidates: { assetId: string; dataUrl: string; origin: string }[];
  /** Ordered selection; the badge of asset `selected[i]` is `i + 1`. */
  selected: string[];
}

export type Phase =
  | "idle"
  | "extracting"
  | "table"
  | "composing"
  | "done"
  | "failed";

export interface UiState {
  phase: Phase;
  sessionId: string | null;
  rows: TermRowState[];
  jobId: string | null;
  progress: number;
  error: string | null;
  previews: { silent: string | null; final: string | null };
  downloadEnabled: boolean;
}

export function initialState(): UiState {
  return {
    phase: "idle",
    sessionId: null,
    rows: [],
    jobId: null,
    progress: 0,
    error: null,
    previews: { silent: null, final: null },
    downloadEnabled: false,
  };
}

export function rowsFromResponse(rows: TermRowResponse[]): TermRowState[] {
  return rows.map((row) => ({
    term: row.term,
    audio: row.audio
      ? {
          assetId: row.audio.asset_id,
          duration: row.audio.duration,
          dataUrl: row.audio.data_url,
        }
      : null,
    candidates: row.images.map((img) => ({
      assetId: img.asset_id,
      dataUrl: img.data_url,
      origin: img.origin,
    })),
    selected: [],
  }));
}

/** Toggle membership; selection order is preserved so badges stay 1..k. */
export function toggleSelection(row: TermRowState, assetId: string): TermRowState {
  const selected = row.selected.includes(assetId)
    ? row.selected.filter((id) => id !== assetId)
    : [...row.selected, assetId];
  return { ...row, selected };
}

/** Badge numbers for a row: contiguous 1..k in selection order. */
export function badges(row: TermRowState): Map<string, number> {
  return new Map(row.selected.map((id, index) => [id, index + 1]));
}

export function badgeInvariantHolds(row: TermRowState): boolean {
  const values = [...badges(row).values()].sort((a, b) => a - b);
  return values.every((value, index) => value === index + 1);
}

export function updateRow(
  state: UiState,
  term: string,
  next: TermRowState,
): UiState {
  return {
    ...state,
    rows: state.rows.map((row) => (row.term === term ? next : row)),
  };
}

export function anySelection(state: UiState): boolean {
  return state.rows.some((row) => row.selected.length > 0);
}

export function applyJob(state: UiState, job: JobView): UiState {
  // Progress is monotone on the server; keep the client monotone too.
  const progress = Math.max(state.progress, job.progress);
  if (job.state === "failed") {
    return { ...state, phase: "failed", progress, error: job.error ?? "job failed" };
  }
  if (job.state === "done") {
    return { ...state, phase: "done", progress: 1, error: null };
  }
  return { ...state, phase: "composing", progress };
}

export function submitEnabled(input: string): boolean {
  return input.trim().length > 0;
}

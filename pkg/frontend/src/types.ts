/** Wire types mirrored from the studio service API. */

export interface NormalizedTextView {
  original: string;
  tokens: string[];
  source: "typed" | "transcribed";
}

export interface SessionView {
  session_id: string;
  text: NormalizedTextView;
  selections: Record<string, string[]>;
  active_job: string | null;
  outputs: { silent: boolean; final: boolean };
}

export interface AudioRef {
  asset_id: string;
  duration: number;
  data_url: string;
}

export interface ImageRef {
  asset_id: string;
  width: number;
  height: number;
  origin: "library" | "generated";
  data_url: string;
}

export interface TermRowResponse {
  term: string;
  score: number;
  rank: number;
  audio: AudioRef | null;
  images: ImageRef[];
}

export interface JobView {
  job_id: string;
  session_id: string;
  state: "queued" | "running" | "done" | "failed";
  progress: number;
  error: string | null;
}

export interface ApiErrorBody {
  error: string;
  message: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

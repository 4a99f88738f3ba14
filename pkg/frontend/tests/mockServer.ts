/** In-memory stand-in for the studio service, wired as a fetch function. */

import { JobView, SessionView, TermRowResponse } from "../src/types";

const PNG_URL = "data:image/png;base64,iVBORw0KGgo=";
const WAV_URL = "data:audio/wav;base64,UklGRg==";

export function fixtureRows(): TermRowResponse[] {
  return [
    {
      term: "water",
      score: 2,
      rank: 1,
      audio: { asset_id: "aud-water", duration: 2.0, data_url: WAV_URL },
      images: [
        { asset_id: "img-w1", width: 32, height: 32, origin: "library", data_url: PNG_URL },
        { asset_id: "img-w2", width: 32, height: 32, origin: "library", data_url: PNG_URL },
        { asset_id: "img-w3", width: 32, height: 32, origin: "generated", data_url: PNG_URL },
      ],
    },
    {
      term: "cycle",
      score: 1,
      rank: 2,
      audio: null,
      images: [
        { asset_id: "img-c1", width: 32, height: 32, origin: "library", data_url: PNG_URL },
        { asset_id: "img-c2", width: 32, height: 32, origin: "library", data_url: PNG_URL },
      ],
    },
  ];
}

interface MockSession {
  view: SessionView;
  selections: Record<string, string[]>;
}

export class MockServer {
  sessions = new Map<string, MockSession>();
  jobs = new Map<string, { view: JobView; script: JobView[] }>();
  calls: { method: string; url: string }[] = [];
  rejectSelection = false;
  failNextStatusCalls = 0;
  activeJob: string | null = null;
  private counter = 0;

  /** progress states played one per poll after queueing. */
  jobScript: Array<Pick<JobView, "state" | "progress" | "error">> = [
    { state: "running", progress: 0.3, error: null },
    { state: "running", progress: 0.7, error: null },
    { state: "done", progress: 1.0, error: null },
  ];

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    this.calls.push({ method, url });
    const body = init?.body ? JSON.parse(String(init.body)) : null;

    if (method === "POST" && url === "/api/sessions") {
      if (!body?.text || !String(body.text).trim()) {
        return err(422, "bad_input", "text must be non-empty");
      }
      const id = `s${++this.counter}`;
      const view: SessionView = {
        session_id: id,
        text: {
          original: body.text,
          tokens: String(body.text).toLowerCase().split(/\s+/),
          source: "typed",
        },
        selections: {},
        active_job: null,
        outputs: { silent: false, final: false },
      };
      this.sessions.set(id, { view, selections: {} });
      return ok(view);
    }

    let match = url.match(/^\/api\/sessions\/([^/]+)\/terms$/);
    if (method === "POST" && match) {
      if (!this.sessions.has(match[1])) {
        return err(404, "session_not_found", "no such session");
      }
      return ok({ rows: fixtureRows() });
    }

    match = url.match(/^\/api\/sessions\/([^/]+)\/terms\/([^/]+)\/selection$/);
    if (method === "PUT" && match) {
      const session = this.sessions.get(match[1]);
      if (!session) {
        return err(404, "session_not_found", "no such session");
      }
      if (this.rejectSelection) {
        return err(422, "unknown_asset", "rejected by test configuration");
      }
      const term = decodeURIComponent(match[2]);
      const known = fixtureRows().find((r) => r.term === term);
      if (!known) {
        return err(404, "term_not_found", "term not extracted");
      }
      const ids = (body?.asset_ids ?? []) as string[];
      const candidates = known.images.map((i) => i.asset_id);
      if (ids.some((id) => !candidates.includes(id))) {
        return err(422, "unknown_asset", "not a candidate");
      }
      session.selections[term] = ids;
      session.view.selections = { ...session.selections };
      return ok(session.view);
    }

    match = url.match(/^\/api\/sessions\/([^/]+)\/video\?kind=(silent|final)$/);
    if (method === "GET" && match) {
      const session = this.sessions.get(match[1]);
      if (!session || !session.view.outputs[match[2] as "silent" | "final"]) {
        return err(404, "not_produced", "no video yet");
      }
      return new Response(new Blob([new Uint8Array([82, 73, 70, 70])]), {
        status: 200,
        headers: { "Content-Type": "video/x-msvideo" },
      });
    }

    match = url.match(/^\/api\/sessions\/([^/]+)\/video$/);
    if (method === "POST" && match) {
      const session = this.sessions.get(match[1]);
      if (!session) {
        return err(404, "session_not_found", "no such session");
      }
      if (this.activeJob) {
        return err(409, "job_active", "a compose job is already running");
      }
      if (!Object.values(session.selections).some((ids) => ids.length > 0)) {
        return err(422, "no_selection", "no term has selected images");
      }
      const jobId = `j${++this.counter}`;
      const view: JobView = {
        job_id: jobId,
        session_id: match[1],
        state: "queued",
        progress: 0,
        error: null,
      };
      const script = this.jobScript.map((step) => ({ ...view, ...step }));
      this.jobs.set(jobId, { view, script });
      this.activeJob = jobId;
      return ok({ job_id: jobId });
    }

    match = url.match(/^\/api\/jobs\/([^/]+)$/);
    if (method === "GET" && match) {
      if (this.failNextStatusCalls > 0) {
        this.failNextStatusCalls -= 1;
        throw new TypeError("network down");
      }
      const job = this.jobs.get(match[1]);
      if (!job) {
        return err(404, "job_not_found", "no such job");
      }
      const next = job.script.shift();
      if (next) {
        job.view = next;
      }
      if (job.view.state === "done" || job.view.state === "failed") {
        this.activeJob = null;
        const session = this.sessions.get(job.view.session_id);
        if (session && job.view.state === "done") {
          session.view.outputs = { silent: true, final: true };
        }
      }
      return ok(job.view);
    }

    return err(404, "unknown_route", `no route for ${method} ${url}`);
  };
}

function ok(payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status: 200,
    headers: { "Content-Type": "application/json" },
  });
}

function err(status: number, code: string, message: string): Response {
  return new Response(JSON.stringify({ error: code, message }), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export const DOCUMENTED_ENDPOINTS = [
  /^\/api\/sessions$/,
  /^\/api\/sessions\/[^/]+\/terms$/,
  /^\/api\/sessions\/[^/]+\/terms\/[^/]+\/selection$/,
  /^\/api\/sessions\/[^/]+\/video$/,
  /^\/api\/sessions\/[^/]+\/video\?kind=(silent|final)$/,
  /^\/api\/jobs\/[^/]+$/,
];

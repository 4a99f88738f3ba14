import { describe, expect, it } from "vitest";

import { StudioClient } from "../src/api";
import { nextDelay, pollJob, POLL_INTERVAL_MS } from "../src/polling";
import { JobView } from "../src/types";
import { MockServer } from "./mockServer";

function instantSleep(log: number[]): (ms: number) => Promise<void> {
  return (ms) => {
    log.push(ms);
    return Promise.resolve();
  };
}

describe("pollJob", () => {
  it("plays the job script to completion with monotone progress", async () => {
    const server = new MockServer();
    const client = new StudioClient("", server.fetch);
    const session = await client.createSession({ text: "water" });
    await client.putSelection(session.session_id, "water", ["img-w1"]);
    const { job_id } = await client.composeVideo(session.session_id);

    const seen: JobView[] = [];
    const delays: number[] = [];
    const handle = pollJob(client, job_id, (j) => seen.push(j), instantSleep(delays));
    const final = await handle.done;
    expect(final.state).toBe("done");
    const progresses = seen.map((j) => j.progress);
    expect([...progresses].sort((a, b) => a - b)).toEqual(progresses);
    expect(delays.every((d) => d === POLL_INTERVAL_MS)).toBe(true);
  });

  it("backs off exponentially on network loss and resumes", async () => {
    const server = new MockServer();
    const client = new StudioClient("", server.fetch);
    const session = await client.createSession({ text: "water" });
    await client.putSelection(session.session_id, "water", ["img-w1"]);
    const { job_id } = await client.composeVideo(session.session_id);

    server.failNextStatusCalls = 3;
    const delays: number[] = [];
    const handle = pollJob(client, job_id, () => {}, instantSleep(delays));
    const final = await handle.done;
    expect(final.state).toBe("done");
    // Three failures: 1000, 2000, 4000; then recovery resets to 500.
    expect(delays.slice(0, 3)).toEqual([1000, 2000, 4000]);
    expect(delays[3]).toBe(POLL_INTERVAL_MS);
  });

  it("caps the backoff at five seconds", () => {
    let delay = POLL_INTERVAL_MS;
    for (let i = 0; i < 10; i++) {
      delay = nextDelay(delay);
    }
    expect(delay).toBe(5000);
  });

  it("cancel stops the loop", async () => {
    const server = new MockServer();
    server.jobScript = [
      { state: "running", progress: 0.1, error: null },
      { state: "running", progress: 0.2, error: null },
      { state: "running", progress: 0.3, error: null },
      { state: "done", progress: 1, error: null },
    ];
    const client = new StudioClient("", server.fetch);
    const session = await client.createSession({ text: "water" });
    await client.putSelection(session.session_id, "water", ["img-w1"]);
    const { job_id } = await client.composeVideo(session.session_id);

    let updates = 0;
    const handle = pollJob(client, job_id, () => {
      updates += 1;
      if (updates === 2) {
        handle.cancel();
      }
    });
    await expect(handle.done).rejects.toThrow("polling cancelled");
    expect(updates).toBe(2);
  });
});

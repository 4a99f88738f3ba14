/** Job polling: 500 ms cadence, exponential backoff to 5 s on transport
 * failure, state preserved across resumes. */

import { StudioClient } from "./api";
import { JobView } from "./types";

export const POLL_INTERVAL_MS = 500;
export const POLL_BACKOFF_MAX_MS = 5000;

export interface PollHandle {
  cancel(): void;
  done: Promise<JobView>;
}

export function nextDelay(current: number): number {
  return Math.min(current * 2, POLL_BACKOFF_MAX_MS);
}

export function pollJob(
  client: StudioClient,
  jobId: string,
  onUpdate: (job: JobView) => void,
  sleep: (ms: number) => Promise<void> = (ms) =>
    new Promise((resolve) => setTimeout(resolve, ms)),
): PollHandle {
  let cancelled = false;

  const done = (async () => {
    let delay = POLL_INTERVAL_MS;
    for (;;) {
      if (cancelled) {
        throw new Error("polling cancelled");
      }
      let job: JobView | null = null;
      try {
        job = await client.jobStatus(jobId);
        delay = POLL_INTERVAL_MS; // transport recovered: reset cadence
      } catch (err) {
        // Server answered with an error status: surface it. Transport
        // failures (TypeError from fetch) back off and retry.
        if ((err as { status?: number }).status !== undefined) {
          throw err;
        }
        delay = nextDelay(delay);
      }
      if (job) {
        onUpdate(job);
        if (job.state === "done" || job.state === "failed") {
          return job;
        }
      }
      await sleep(delay);
    }
  })();

  return {
    cancel() {
      cancelled = true;
    },
    done,
  };
}

import { describe, expect, it } from "vitest";

import { StudioClient } from "../src/api";
import { ApiError } from "../src/types";
import { DOCUMENTED_ENDPOINTS, MockServer } from "./mockServer";

describe("StudioClient", () => {
  it("round-trips a session create", async () => {
    const server = new MockServer();
    const client = new StudioClient("", server.fetch);
    const session = await client.createSession({ text: "water cycle" });
    expect(session.session_id).toBeTruthy();
    expect(session.text.tokens).toEqual(["water", "cycle"]);
  });

  it("raises typed errors with the server's code", async () => {
    const server = new MockServer();
    const client = new StudioClient("", server.fetch);
    await expect(client.createSession({ text: "  " })).rejects.toMatchObject({
      status: 422,
      code: "bad_input",
    });
    await expect(client.jobStatus("nope")).rejects.toBeInstanceOf(ApiError);
  });

  it("never calls outside the documented endpoint set", async () => {
    const server = new MockServer();
    const client = new StudioClient("", server.fetch);
    const session = await client.createSession({ text: "water cycle" });
    await client.extractTerms(session.session_id);
    await client.putSelection(session.session_id, "water", ["img-w1"]);
    const { job_id } = await client.composeVideo(session.session_id);
    await client.jobStatus(job_id);
    await client.jobStatus(job_id);
    await client.jobStatus(job_id);
    await client.downloadVideo(session.session_id, "silent");
    for (const call of server.calls) {
      expect(
        DOCUMENTED_ENDPOINTS.some((pattern) => pattern.test(call.url)),
        `undocumented call: ${call.method} ${call.url}`,
      ).toBe(true);
    }
  });
});

/** End-to-end operator flow against the mock server. */

import { beforeEach, describe, expect, it } from "vitest";

import { StudioClient } from "../src/api";
import { StudioApp } from "../src/app";
import { DOCUMENTED_ENDPOINTS, MockServer } from "./mockServer";

const instant = () => Promise.resolve();

function makeApp(server: MockServer) {
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  const client = new StudioClient("", server.fetch);
  const app = new StudioApp(root, client, { getUserMedia: false }, instant);
  return { root, app };
}

if (typeof URL.createObjectURL !== "function") {
  // happy-dom lacks object URLs; previews only need a stable string.
  (URL as unknown as { createObjectURL: (b: Blob) => string }).createObjectURL =
    () => `blob:mock-${Math.random().toString(36).slice(2)}`;
}

describe("operator flow", () => {
  let server: MockServer;

  beforeEach(() => {
    server = new MockServer();
  });

  it("sentence -> two-row term table", async () => {
    const { root, app } = makeApp(server);
    await app.submitSentence("the water cycle");
    const rows = root.querySelectorAll("#term-table tr[data-term]");
    expect(rows).toHaveLength(2);
    expect(rows[0].querySelector(".term-cell")?.textContent).toBe("water");
    expect(rows[0].querySelector("audio")).not.toBeNull();
    expect(rows[1].querySelector("audio")).toBeNull();
    expect(rows[0].querySelectorAll("img")).toHaveLength(3);
  });

  it("empty input never submits", async () => {
    const { root, app } = makeApp(server);
    await app.submitSentence("   ");
    expect(root.querySelector("#term-table tr[data-term]")).toBeNull();
    expect(server.calls).toHaveLength(0);
    const button = root.querySelector("#submit-btn");
    expect(button?.hasAttribute("disabled")).toBe(true);
  });

  it("full happy path: select two, create, progress to done, download enabled", async () => {
    const { root, app } = makeApp(server);
    await app.submitSentence("the water cycle");
    await app.onToggle("water", "img-w1");
    await app.onToggle("water", "img-w2");

    const selected = root.querySelectorAll('tr[data-term="water"] .thumb.selected');
    expect(selected).toHaveLength(2);
    const badgeTexts = [...selected].map(
      (node) => node.querySelector(".badge")?.textContent,
    );
    expect(badgeTexts).toEqual(["1", "2"]);

    await app.createVideo();
    expect(app.state.phase).toBe("done");
    expect(app.state.progress).toBe(1);
    expect(root.querySelector("#silent-preview")).not.toBeNull();
    expect(root.querySelector("#final-preview")).not.toBeNull();
    const link = root.querySelector("#download-link");
    expect(link).not.toBeNull();
    expect(link?.getAttribute("aria-disabled")).toBeNull();

    for (const call of server.calls) {
      expect(
        DOCUMENTED_ENDPOINTS.some((pattern) => pattern.test(call.url)),
        `undocumented call: ${call.method} ${call.url}`,
      ).toBe(true);
    }
  });

  it("server rejection reverts the optimistic selection", async () => {
    const { root, app } = makeApp(server);
    await app.submitSentence("the water cycle");
    await app.onToggle("water", "img-w1");
    const before = JSON.stringify(app.state.rows);

    server.rejectSelection = true;
    await app.onToggle("water", "img-w2");
    expect(JSON.stringify(app.state.rows)).toBe(before);
    const selected = root.querySelectorAll('tr[data-term="water"] .thumb.selected');
    expect(selected).toHaveLength(1);
    expect(app.state.error).toContain("unknown_asset");
  });

  it("create button disabled without selections", async () => {
    const { root, app } = makeApp(server);
    await app.submitSentence("the water cycle");
    const button = root.querySelector("#create-btn");
    expect(button?.hasAttribute("disabled")).toBe(true);
    await app.onToggle("water", "img-w1");
    expect(
      document.querySelector("#create-btn")?.hasAttribute("disabled"),
    ).toBe(false);
  });

  it("409 renders an already-running message", async () => {
    const { app } = makeApp(server);
    await app.submitSentence("the water cycle");
    await app.onToggle("water", "img-w1");
    server.activeJob = "j-external";
    await app.createVideo();
    expect(app.state.error).toContain("already");
    expect(app.state.phase).toBe("table");
  });

  it("failed job surfaces the job error", async () => {
    server.jobScript = [
      { state: "running", progress: 0.4, error: null },
      { state: "failed", progress: 0.4, error: "asset gone missing" },
    ];
    const { root, app } = makeApp(server);
    await app.submitSentence("the water cycle");
    await app.onToggle("water", "img-w1");
    await app.createVideo();
    expect(app.state.phase).toBe("failed");
    expect(root.querySelector("#job-error")?.textContent).toContain(
      "asset gone missing",
    );
  });

  it("mid-poll network loss resumes with state intact", async () => {
    const { app } = makeApp(server);
    await app.submitSentence("the water cycle");
    await app.onToggle("water", "img-w1");
    server.failNextStatusCalls = 2;
    await app.createVideo();
    expect(app.state.phase).toBe("done");
    expect(app.state.downloadEnabled).toBe(true);
  });

  it("replaying the same responses reproduces the same rendered state", async () => {
    const runs: string[] = [];
    for (let i = 0; i < 2; i++) {
      const freshServer = new MockServer();
      const { root, app } = makeApp(freshServer);
      await app.submitSentence("the water cycle");
      await app.onToggle("water", "img-w1");
      await app.onToggle("cycle", "img-c2");
      runs.push(root.innerHTML.replace(/blob:mock-[a-z0-9]+/g, "blob:X"));
    }
    expect(runs[0]).toBe(runs[1]);
  });

  it("mic control hidden when capture is unavailable", async () => {
    const { root } = makeApp(server);
    expect(root.querySelector("#mic-btn")).toBeNull();
  });
});

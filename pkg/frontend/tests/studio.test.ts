// Scripted studio flow against an in-memory fake of the service that
// enforces the same state machine and status codes.

import { describe, expect, it } from "vitest";

import { PipelineClient } from "../src/api.js";
import { StudioController } from "../src/studio.js";

type State = "Created" | "Sketched" | "InferringImages" | "AwaitingSelection"
  | "Reconstructing" | "Done" | "Failed";

class FakeService {
  state: State = "Created";
  prompt: string | null = null;
  candidateCount = 0;
  selected: number | null = null;
  ticksUntilReady = 2;  // poll cycles before async stages finish

  private advance(): void {
    if (this.state === "InferringImages" || this.state === "Reconstructing") {
      if (--this.ticksUntilReady <= 0) {
        this.state = this.state === "InferringImages" ? "AwaitingSelection" : "Done";
        this.ticksUntilReady = 2;
      }
    }
  }

  fetch = async (url: string | URL | Request, init?: RequestInit): Promise<Response> => {
    const path = String(url).replace("http://fake", "");
    const method = init?.method ?? "GET";
    const json = (status: number, body: unknown) =>
      new Response(JSON.stringify(body), { status, headers: { "Content-Type": "application/json" } });

    if (method === "POST" && path === "/v1/sessions") {
      return json(200, { session_id: "fake-1" });
    }
    if (method === "PUT" && path.endsWith("/sketch")) {
      if (!["Created", "Sketched", "AwaitingSelection"].includes(this.state)) {
        return json(409, { detail: `cannot sketch in ${this.state}` });
      }
      this.state = "Sketched";
      this.candidateCount = 0;
      return new Response(null, { status: 204 });
    }
    if (method === "POST" && path.endsWith("/generate")) {
      if (this.state !== "Sketched") return json(409, { detail: "not sketched" });
      const body = JSON.parse(String(init?.body ?? "{}"));
      this.prompt = body.prompt;
      this.candidateCount = body.candidates ?? 4;
      this.state = "InferringImages";
      return json(202, { state: this.state });
    }
    if (method === "POST" && path.endsWith("/select")) {
      if (this.state !== "AwaitingSelection") return json(409, { detail: "not awaiting" });
      const body = JSON.parse(String(init?.body ?? "{}"));
      if (body.index < 0 || body.index >= this.candidateCount) {
        return json(404, { detail: "candidate out of range" });
      }
      this.selected = body.index;
      this.state = "Reconstructing";
      return json(202, { state: this.state });
    }
    if (method === "GET" && /\/v1\/sessions\/[^/]+$/.test(path)) {
      this.advance();
      return json(200, {
        session_id: "fake-1", state: this.state, prompt: this.prompt, seed: 0,
        candidate_count: this.state === "Sketched" ? 0 : this.candidateCount,
        selected: this.selected, timings_ms: {}, error: null,
        has_asset: this.state === "Done",
      });
    }
    return json(404, { detail: `unhandled ${method} ${path}` });
  };
}

function makeStudio() {
  const fake = new FakeService();
  const client = new PipelineClient("http://fake", fake.fetch);
  const studio = new StudioController(client, undefined, { pollMs: 1, candidates: 4 });
  return { fake, client, studio };
}

function drawSquare(studio: StudioController) {
  studio.sketch.beginStroke(0.2, 0.2, 6, [0, 0, 0]);
  for (const [x, y] of [[0.8, 0.2], [0.8, 0.8], [0.2, 0.8], [0.2, 0.2]] as const) {
    studio.sketch.extendStroke(x, y);
  }
  studio.sketch.endStroke();
}

describe("StudioController", () => {
  it("mirrors server state and completes the scripted flow legally", async () => {
    const { client, studio } = makeStudio();
    expect(studio.phase).toBe("NoSession");

    drawSquare(studio);
    await studio.uploadSketch();
    expect(studio.phase).toBe("Sketched");
    expect(studio.canGenerate()).toBe(true);
    expect(studio.canSelect()).toBe(false);

    await studio.generate("a crate");
    expect(["InferringImages", "AwaitingSelection"]).toContain(studio.phase);
    await studio.awaitPhase(["AwaitingSelection"]);
    expect(studio.canSelect()).toBe(true);

    await studio.select(1);
    await studio.awaitPhase(["Done"]);
    expect(studio.status?.has_asset).toBe(true);

    // the scripted flow must never have triggered an illegal-state answer
    const illegal = client.responseLog.filter((e) => e.status >= 400);
    expect(illegal).toEqual([]);
  });

  it("gates actions that the server would reject", async () => {
    const { studio } = makeStudio();
    drawSquare(studio);
    await studio.uploadSketch();
    await expect(studio.select(0)).rejects.toThrow(/not allowed/);
    await studio.generate("x");
    await expect(studio.generate("again")).rejects.toThrow(/not allowed/);
    await studio.awaitPhase(["AwaitingSelection"]);
    await expect(studio.select(99)).rejects.toThrow(/out of range/);
  });

  it("re-sketch is legal while awaiting selection", async () => {
    const { studio } = makeStudio();
    drawSquare(studio);
    await studio.uploadSketch();
    await studio.generate("x");
    await studio.awaitPhase(["AwaitingSelection"]);
    expect(studio.canUploadSketch()).toBe(true);
    await studio.uploadSketch();
    expect(studio.phase).toBe("Sketched");
  });

  it("surfaces stage-labeled failures", async () => {
    const { fake, studio } = makeStudio();
    drawSquare(studio);
    await studio.uploadSketch();
    await studio.generate("x");
    fake.state = "Failed";
    await expect(studio.awaitPhase(["Done"])).rejects.toThrow(/pipeline failed/);
  });
});

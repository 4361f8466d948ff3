// Studio controller: mirrors the server's session state and gates which API
// calls are legal, so the UI never fires a request the server would 409.

import { PipelineClient, SessionStatus } from "./api.js";
import { SketchModel } from "./sketch.js";

export type Phase =
  | "NoSession"
  | "Created"
  | "Sketched"
  | "InferringImages"
  | "AwaitingSelection"
  | "Reconstructing"
  | "Done"
  | "Failed";

export interface StudioOptions {
  pollMs?: number;
  candidates?: number;
}

const sleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export class StudioController {
  readonly sketch: SketchModel;
  private sessionId: string | null = null;
  private lastStatus: SessionStatus | null = null;
  private readonly pollMs: number;
  readonly candidates: number;

  constructor(readonly client: PipelineClient, sketch?: SketchModel,
              options: StudioOptions = {}) {
    this.sketch = sketch ?? new SketchModel();
    this.pollMs = options.pollMs ?? 500;
    this.candidates = options.candidates ?? 4;
  }

  /** Phase is always derived from the last server answer, never invented. */
  get phase(): Phase {
    if (this.sessionId === null) return "NoSession";
    return (this.lastStatus?.state ?? "Created") as Phase;
  }

  get session(): string | null {
    return this.sessionId;
  }

  get status(): SessionStatus | null {
    return this.lastStatus;
  }

  get errorMessage(): string | null {
    const err = this.lastStatus?.error;
    return err ? `${err.stage}: ${err.message}` : null;
  }

  canUploadSketch(): boolean {
    return ["Created", "Sketched", "AwaitingSelection"].includes(this.phase);
  }

  canGenerate(): boolean {
    return this.phase === "Sketched";
  }

  canSelect(): boolean {
    return this.phase === "AwaitingSelection";
  }

  async ensureSession(): Promise<string> {
    if (this.sessionId === null) {
      this.sessionId = await this.client.createSession();
      await this.refresh();
    }
    return this.sessionId;
  }

  async refresh(): Promise<SessionStatus> {
    if (this.sessionId === null) throw new Error("no session yet");
    this.lastStatus = await this.client.status(this.sessionId);
    return this.lastStatus;
  }

  async uploadSketch(): Promise<void> {
    const id = await this.ensureSession();
    if (!this.canUploadSketch()) {
      throw new Error(`sketch upload not allowed in phase ${this.phase}`);
    }
    await this.client.putSketch(id, this.sketch.serialize());
    await this.refresh();
  }

  async generate(prompt: string, seed?: number): Promise<void> {
    if (!this.canGenerate()) {
      throw new Error(`generate not allowed in phase ${this.phase}`);
    }
    await this.client.generate(this.sessionId!, prompt, seed, this.candidates);
    await this.refresh();
  }

  async select(index: number): Promise<void> {
    if (!this.canSelect()) {
      throw new Error(`select not allowed in phase ${this.phase}`);
    }
    const count = this.lastStatus?.candidate_count ?? 0;
    if (index < 0 || index >= count) {
      throw new Error(`candidate ${index} out of range (have ${count})`);
    }
    await this.client.select(this.sessionId!, index);
    await this.refresh();
  }

  /** Poll until the session reaches one of the target phases. */
  async awaitPhase(targets: Phase[], timeoutMs = 60_000): Promise<SessionStatus> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const status = await this.refresh();
      if (targets.includes(status.state as Phase)) return status;
      if (status.state === "Failed") {
        throw new Error(`pipeline failed: ${this.errorMessage ?? "unknown"}`);
      }
      if (Date.now() > deadline) {
        throw new Error(`timed out waiting for ${targets.join("/")}`);
      }
      await sleep(this.pollMs);
    }
  }
}

// Studio entry point: draw a sketch, speak or type a prompt, review the
// candidate gallery, and inspect/download the generated mesh.

import { ApiError, PipelineClient } from "./api.js";
import { sha256Hex } from "./digest.js";
import { parseObj, ParsedMesh } from "./objparse.js";
import { SketchModel } from "./sketch.js";
import { captureVoicePrompt, isSpeechSupported } from "./speech.js";
import { StudioController } from "./studio.js";
import { Camera, defaultCamera, drawFrame, orbit, zoom } from "./viewer.js";

const SERVICE_URL =
  new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8765";

const app = document.querySelector<HTMLDivElement>("#app")!;
app.innerHTML = `
  <h1>meshforge studio</h1>
  <div class="columns">
    <section class="panel">
      <h2>1 &middot; Sketch</h2>
      <canvas id="sketchCanvas" width="512" height="512"></canvas>
      <div class="row">
        <label>Brush <input id="brushWidth" type="range" min="2" max="40" value="12"></label>
        <input id="brushColor" type="color" value="#1a1a1a">
        <button id="undoBtn">Undo</button>
        <button id="clearBtn">Clear</button>
      </div>
      <div class="row">
        <input id="promptInput" type="text" placeholder="describe the object (or dictate)">
        <button id="micBtn" title="dictate prompt">&#127908;</button>
      </div>
      <div class="row">
        <button id="generateBtn" disabled>Generate</button>
        <span id="speechNote" class="note"></span>
      </div>
    </section>
    <section class="panel">
      <h2>2 &middot; Review</h2>
      <div id="gallery" class="gallery"></div>
    </section>
    <section class="panel">
      <h2>3 &middot; Inspect</h2>
      <canvas id="viewerCanvas" width="512" height="512"></canvas>
      <div class="row">
        <a id="downloadObj" download="mesh.obj">mesh.obj</a>
        <a id="downloadMtl" download="material.mtl">material.mtl</a>
        <a id="downloadManifest" download="manifest.json">manifest.json</a>
      </div>
      <div id="digestNote" class="note"></div>
    </section>
  </div>
  <div id="statusLine" class="status">no session</div>
`;

const sketchCanvas = document.querySelector<HTMLCanvasElement>("#sketchCanvas")!;
const viewerCanvas = document.querySelector<HTMLCanvasElement>("#viewerCanvas")!;
const gallery = document.querySelector<HTMLDivElement>("#gallery")!;
const statusLine = document.querySelector<HTMLDivElement>("#statusLine")!;
const promptInput = document.querySelector<HTMLInputElement>("#promptInput")!;
const brushWidth = document.querySelector<HTMLInputElement>("#brushWidth")!;
const brushColor = document.querySelector<HTMLInputElement>("#brushColor")!;
const generateBtn = document.querySelector<HTMLButtonElement>("#generateBtn")!;
const micBtn = document.querySelector<HTMLButtonElement>("#micBtn")!;
const speechNote = document.querySelector<HTMLSpanElement>("#speechNote")!;
const digestNote = document.querySelector<HTMLDivElement>("#digestNote")!;

const client = new PipelineClient(SERVICE_URL);
const studio = new StudioController(client, new SketchModel(1024, 1024));
const sketchCtx = sketchCanvas.getContext("2d")!;
const viewerCtx = viewerCanvas.getContext("2d")!;

let camera: Camera = defaultCamera();
let mesh: ParsedMesh | null = null;
let drawing = false;

function hexToRgb(hex: string): [number, number, number] {
  const v = parseInt(hex.slice(1), 16);
  return [((v >> 16) & 255) / 255, ((v >> 8) & 255) / 255, (v & 255) / 255];
}

function repaintSketch(): void {
  sketchCtx.fillStyle = "#ffffff";
  sketchCtx.fillRect(0, 0, sketchCanvas.width, sketchCanvas.height);
  for (const stroke of studio.sketch.visibleStrokes()) {
    const [r, g, b] = stroke.color;
    sketchCtx.strokeStyle = `rgb(${r * 255},${g * 255},${b * 255})`;
    sketchCtx.lineWidth = (stroke.width * sketchCanvas.width) / studio.sketch.widthPx;
    sketchCtx.lineCap = "round";
    sketchCtx.lineJoin = "round";
    sketchCtx.beginPath();
    stroke.points.forEach(([x, y], i) => {
      const px = x * sketchCanvas.width;
      const py = y * sketchCanvas.height;
      if (i === 0) sketchCtx.moveTo(px, py);
      else sketchCtx.lineTo(px, py);
    });
    sketchCtx.stroke();
  }
}

function repaintViewer(): void {
  if (mesh) drawFrame(viewerCtx, mesh, camera, viewerCanvas.width, viewerCanvas.height);
}

function setStatus(text: string, isError = false): void {
  statusLine.textContent = text;
  statusLine.classList.toggle("error", isError);
}

function syncControls(): void {
  generateBtn.disabled = !(studio.canGenerate() && !studio.sketch.isEmpty);
  for (const img of gallery.querySelectorAll("img")) {
    img.classList.toggle("disabled", !studio.canSelect());
  }
}

function canvasPoint(ev: PointerEvent): [number, number] {
  const rect = sketchCanvas.getBoundingClientRect();
  return [(ev.clientX - rect.left) / rect.width, (ev.clientY - rect.top) / rect.height];
}

sketchCanvas.addEventListener("pointerdown", (ev) => {
  drawing = true;
  sketchCanvas.setPointerCapture(ev.pointerId);
  const [x, y] = canvasPoint(ev);
  studio.sketch.beginStroke(x, y, Number(brushWidth.value), hexToRgb(brushColor.value));
  repaintSketch();
});
sketchCanvas.addEventListener("pointermove", (ev) => {
  if (!drawing) return;
  const [x, y] = canvasPoint(ev);
  studio.sketch.extendStroke(x, y);
  repaintSketch();
});
const finishStroke = async () => {
  if (!drawing) return;
  drawing = false;
  studio.sketch.endStroke();
  repaintSketch();
  try {
    await studio.uploadSketch();
    setStatus(`sketch uploaded (${studio.sketch.strokeCount} strokes)`);
  } catch (err) {
    setStatus(`sketch upload: ${String(err)}`, true);
  }
  syncControls();
};
sketchCanvas.addEventListener("pointerup", finishStroke);
sketchCanvas.addEventListener("pointerleave", finishStroke);

document.querySelector("#undoBtn")!.addEventListener("click", async () => {
  studio.sketch.undo();
  repaintSketch();
  if (studio.canUploadSketch() && !studio.sketch.isEmpty) await studio.uploadSketch();
  syncControls();
});
document.querySelector("#clearBtn")!.addEventListener("click", () => {
  studio.sketch.clear();
  repaintSketch();
  syncControls();
});

micBtn.addEventListener("click", async () => {
  if (!isSpeechSupported()) {
    speechNote.textContent = "speech recognition unavailable; type the prompt";
    return;
  }
  speechNote.textContent = "listening...";
  try {
    promptInput.value = await captureVoicePrompt();
    speechNote.textContent = "transcript inserted; edit before generating";
  } catch (err) {
    speechNote.textContent = `dictation failed (${String(err)}); type instead`;
  }
});

async function showGallery(count: number): Promise<void> {
  gallery.innerHTML = "";
  const sessionId = studio.session!;
  for (let i = 0; i < count; i++) {
    const img = document.createElement("img");
    img.src = client.candidateUrl(sessionId, i);
    img.title = `candidate ${i}`;
    img.addEventListener("click", () => void pickCandidate(i));
    gallery.appendChild(img);
  }
}

async function pickCandidate(index: number): Promise<void> {
  if (!studio.canSelect()) return;  // mirrors the server's 409 rule
  try {
    setStatus(`reconstructing candidate ${index}...`);
    await studio.select(index);
    await studio.awaitPhase(["Done"]);
    await showAsset();
  } catch (err) {
    setStatus(String(err), true);
  }
  syncControls();
}

async function showAsset(): Promise<void> {
  const sessionId = studio.session!;
  const [manifest, objText, mtlText] = await Promise.all([
    client.manifest(sessionId), client.meshObj(sessionId), client.materialMtl(sessionId)]);
  mesh = parseObj(objText);
  camera = defaultCamera();
  repaintViewer();

  const objDigest = await sha256Hex(objText);
  const verified = objDigest === manifest.sha256.obj;
  digestNote.textContent = verified
    ? `sha256 verified: ${objDigest.slice(0, 16)}...`
    : `DIGEST MISMATCH: got ${objDigest.slice(0, 16)}`;
  digestNote.classList.toggle("error", !verified);

  const link = (id: string, text: string, type: string) => {
    const a = document.querySelector<HTMLAnchorElement>(id)!;
    a.href = URL.createObjectURL(new Blob([text], { type }));
  };
  link("#downloadObj", objText, "text/plain");
  link("#downloadMtl", mtlText, "text/plain");
  link("#downloadManifest", JSON.stringify(manifest, null, 2), "application/json");
  const t = manifest.timings_ms;
  setStatus(`done: ${manifest.counts.vertices} vertices, `
    + `${manifest.counts.triangles} triangles in ${Math.round(t.total)} ms`);
}

generateBtn.addEventListener("click", async () => {
  const prompt = promptInput.value;
  if (prompt === "" && !confirm("Generate without a prompt?")) return;
  try {
    setStatus("inferring candidate images...");
    await studio.generate(prompt);
    const status = await studio.awaitPhase(["AwaitingSelection"]);
    await showGallery(status.candidate_count);
    setStatus("pick a candidate to reconstruct");
  } catch (err) {
    setStatus(err instanceof ApiError ? `${err.status}: ${err.message}` : String(err), true);
  }
  syncControls();
});

viewerCanvas.addEventListener("pointerdown", (ev) => {
  viewerCanvas.setPointerCapture(ev.pointerId);
  let last: [number, number] = [ev.clientX, ev.clientY];
  const move = (m: PointerEvent) => {
    camera = orbit(camera, (m.clientX - last[0]) * 0.01, (m.clientY - last[1]) * 0.01);
    last = [m.clientX, m.clientY];
    repaintViewer();
  };
  const up = () => {
    viewerCanvas.removeEventListener("pointermove", move);
    viewerCanvas.removeEventListener("pointerup", up);
  };
  viewerCanvas.addEventListener("pointermove", move);
  viewerCanvas.addEventListener("pointerup", up);
});
viewerCanvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  camera = zoom(camera, ev.deltaY > 0 ? 1.1 : 0.9);
  repaintViewer();
});

if (!isSpeechSupported()) {
  speechNote.textContent = "speech recognition unavailable; typed prompts only";
}
repaintSketch();
void studio.ensureSession()
  .then(() => setStatus(`session ${studio.session} ready; draw a sketch`))
  .catch((err) => setStatus(`service unreachable at ${SERVICE_URL}: ${String(err)}`, true));

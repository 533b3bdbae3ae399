/** Canvas demo app: draw a gesture, read the decision.
 *
 * The controller is pure state plus callbacks so the stroke lifecycle
 * can be tested without a real canvas or socket; main() wires it to
 * the DOM.
 */
import { GestureClient, TransportFactory, browserTransport } from "./client.js";
import { PredictionMessage, ServerMessage } from "./protocol.js";

export interface TrailView {
  /** Append echoed points, normalized [0,1]^2, in draw order. */
  extend(points: [number, number][]): void;
  clear(): void;
}

export interface PanelView {
  showPrediction(msg: PredictionMessage, classes: string[]): void;
  showError(code: string, message: string): void;
  showStatus(text: string): void;
  showGallery(classes: string[]): void;
}

export class Controller {
  client: GestureClient;
  drawing = false;
  threshold = 0.85;
  lastPrediction: PredictionMessage | null = null;

  constructor(
    url: string,
    private trail: TrailView,
    private panel: PanelView,
    factory: TransportFactory = browserTransport,
    private now: () => number = () => performance.now(),
  ) {
    this.client = new GestureClient(
      url,
      {
        onServerMessage: (msg) => this.onMessage(msg),
        onProtocolError: (err) => this.panel.showError("client", err.message),
        onClose: () => this.panel.showStatus("disconnected"),
      },
      factory,
    );
    this.client.start("canvas");
  }

  private onMessage(msg: ServerMessage): void {
    switch (msg.type) {
      case "started":
        this.panel.showStatus(`session ${msg.session_id}`);
        this.panel.showGallery(msg.classes);
        break;
      case "trail":
        this.trail.extend(msg.points);
        break;
      case "prediction":
        this.lastPrediction = msg;
        this.panel.showPrediction(msg, this.client.classes);
        break;
      case "config":
        this.threshold = msg.threshold;
        this.panel.showStatus(`threshold ${msg.threshold.toFixed(2)}`);
        break;
      case "error":
        this.panel.showError(msg.code, msg.message);
        break;
    }
  }

  pointerDown(x: number, y: number): void {
    this.drawing = true;
    this.trail.clear();
    this.client.sendPoint(x, y, this.now());
  }

  pointerMove(x: number, y: number): void {
    if (!this.drawing) return;
    this.client.sendPoint(x, y, this.now());
  }

  pointerUp(): void {
    if (!this.drawing) return;
    this.drawing = false;
    this.client.endStroke();
  }

  setThreshold(value: number): void {
    this.threshold = value;
    this.client.configure(value);
  }
}

/** Decision the panel should display for a prediction at a threshold. */
export function displayedDecision(msg: PredictionMessage, threshold: number): string {
  return msg.confidence > threshold ? msg.decision : "Unclassified";
}

class CanvasTrail implements TrailView {
  private ctx: CanvasRenderingContext2D;
  private last: [number, number] | null = null;

  constructor(private canvas: HTMLCanvasElement) {
    this.ctx = canvas.getContext("2d")!;
  }

  extend(points: [number, number][]): void {
    this.ctx.strokeStyle = "#ffd400";
    this.ctx.lineWidth = 3;
    this.ctx.lineCap = "round";
    for (const [nx, ny] of points) {
      const x = nx * this.canvas.width;
      const y = ny * this.canvas.height;
      if (this.last) {
        this.ctx.beginPath();
        this.ctx.moveTo(this.last[0], this.last[1]);
        this.ctx.lineTo(x, y);
        this.ctx.stroke();
      }
      this.last = [x, y];
    }
  }

  clear(): void {
    this.ctx.fillStyle = "#10141c";
    this.ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    this.last = null;
  }
}

class DomPanel implements PanelView {
  constructor(private root: Document) {}

  private el(id: string): HTMLElement {
    return this.root.getElementById(id)!;
  }

  showPrediction(msg: PredictionMessage, classes: string[]): void {
    this.el("decision").textContent = msg.decision;
    this.el("confidence").textContent =
      `confidence ${msg.confidence.toFixed(3)} · ${msg.latency_ms.toFixed(1)} ms`;
    const bars = this.el("probs");
    bars.innerHTML = "";
    msg.probs.forEach((p, i) => {
      const row = this.root.createElement("div");
      row.className = "prob-row";
      const label = this.root.createElement("span");
      label.textContent = classes[i] ?? `class ${i}`;
      const bar = this.root.createElement("div");
      bar.className = "prob-bar";
      bar.style.width = `${Math.round(p * 100)}%`;
      row.append(label, bar);
      bars.append(row);
    });
  }

  showError(code: string, message: string): void {
    this.el("status").textContent = `${code}: ${message}`;
  }

  showStatus(text: string): void {
    this.el("status").textContent = text;
  }

  showGallery(classes: string[]): void {
    const gallery = this.el("gallery");
    gallery.innerHTML = "";
    for (const name of classes) {
      const chip = this.root.createElement("span");
      chip.className = "chip";
      chip.textContent = name;
      gallery.append(chip);
    }
  }
}

export function main(): void {
  const canvas = document.getElementById("pad") as HTMLCanvasElement;
  const trail = new CanvasTrail(canvas);
  const panel = new DomPanel(document);
  const proto = location.protocol === "https:" ? "wss" : "ws";
  const controller = new Controller(`${proto}://${location.host}/ws`, trail, panel);
  trail.clear();

  const norm = (ev: PointerEvent): [number, number] => {
    const rect = canvas.getBoundingClientRect();
    return [(ev.clientX - rect.left) / rect.width, (ev.clientY - rect.top) / rect.height];
  };

  canvas.addEventListener("pointerdown", (ev) => {
    canvas.setPointerCapture(ev.pointerId);
    const [x, y] = norm(ev);
    controller.pointerDown(x, y);
  });
  canvas.addEventListener("pointermove", (ev) => {
    const [x, y] = norm(ev);
    controller.pointerMove(x, y);
  });
  canvas.addEventListener("pointerup", () => controller.pointerUp());
  canvas.addEventListener("pointercancel", () => controller.pointerUp());

  const slider = document.getElementById("threshold") as HTMLInputElement;
  const readout = document.getElementById("threshold-value")!;
  slider.addEventListener("input", () => {
    readout.textContent = Number(slider.value).toFixed(2);
    controller.setThreshold(Number(slider.value));
  });
}

if (typeof document !== "undefined" && document.getElementById("pad")) {
  main();
}

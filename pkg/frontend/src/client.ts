/** Thin session client over a websocket-like transport.
 *
 * The transport is injectable so the state machine is testable without
 * a browser socket. Outgoing messages queue until the transport opens.
 */
import {
  ClientMessage,
  SegmentMode,
  ServerMessage,
  encodeClientMessage,
  parseServerMessage,
} from "./protocol.js";

export interface Transport {
  send(text: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((text: string) => void) | null;
  onclose: (() => void) | null;
}

export type TransportFactory = (url: string) => Transport;

export function browserTransport(url: string): Transport {
  const ws = new WebSocket(url);
  const t: Transport = {
    send: (text) => ws.send(text),
    close: () => ws.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
  };
  ws.onopen = () => t.onopen?.();
  ws.onmessage = (ev) => t.onmessage?.(String(ev.data));
  ws.onclose = () => t.onclose?.();
  return t;
}

export interface ClientHandlers {
  onServerMessage?: (msg: ServerMessage) => void;
  onProtocolError?: (err: Error) => void;
  onClose?: () => void;
}

export class GestureClient {
  private transport: Transport;
  private opened = false;
  private queue: string[] = [];

  sessionId: string | null = null;
  classes: string[] = [];

  constructor(
    url: string,
    private handlers: ClientHandlers = {},
    factory: TransportFactory = browserTransport,
  ) {
    this.transport = factory(url);
    this.transport.onopen = () => {
      this.opened = true;
      for (const text of this.queue.splice(0)) this.transport.send(text);
    };
    this.transport.onmessage = (text) => this.receive(text);
    this.transport.onclose = () => this.handlers.onClose?.();
  }

  private receive(text: string): void {
    let msg: ServerMessage;
    try {
      msg = parseServerMessage(text);
    } catch (err) {
      this.handlers.onProtocolError?.(err as Error);
      return;
    }
    if (msg.type === "started") {
      this.sessionId = msg.session_id;
      this.classes = msg.classes;
    }
    this.handlers.onServerMessage?.(msg);
  }

  private post(msg: ClientMessage): void {
    const text = encodeClientMessage(msg);
    if (this.opened) {
      this.transport.send(text);
    } else {
      this.queue.push(text);
    }
  }

  start(sessionHint = ""): void {
    this.post({ type: "start", session_hint: sessionHint });
  }

  sendPoint(x: number, y: number, tMs: number): void {
    // clamp: pointer capture can report coordinates just outside the canvas
    const cx = Math.min(1, Math.max(0, x));
    const cy = Math.min(1, Math.max(0, y));
    this.post({ type: "point", x: cx, y: cy, t_ms: Math.round(tMs) });
  }

  endStroke(): void {
    this.post({ type: "end" });
  }

  configure(threshold?: number, mode?: SegmentMode): void {
    this.post({ type: "config", threshold, mode });
  }

  close(): void {
    this.transport.close();
  }
}

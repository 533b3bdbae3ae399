/** Wire protocol shared with the gesture service.
 *
 * All coordinates travel normalized to [0,1]^2; the client owns the
 * mapping from canvas pixels. Every message is a JSON object tagged
 * with a `type` field.
 */

export type SegmentMode = "manual" | "dwell";

export type ClientMessage =
  | { type: "start"; session_hint?: string }
  | { type: "point"; x: number; y: number; t_ms: number }
  | { type: "end" }
  | { type: "config"; threshold?: number; mode?: SegmentMode };

export interface StartedMessage {
  type: "started";
  session_id: string;
  classes: string[];
}

export interface TrailMessage {
  type: "trail";
  points: [number, number][];
}

export interface PredictionMessage {
  type: "prediction";
  probs: number[];
  decision: string;
  confidence: number;
  latency_ms: number;
}

export interface ConfigMessage {
  type: "config";
  threshold: number;
  mode: string;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  message: string;
}

export type ServerMessage =
  | StartedMessage
  | TrailMessage
  | PredictionMessage
  | ConfigMessage
  | ErrorMessage;

export class ProtocolError extends Error {}

function fail(why: string): never {
  throw new ProtocolError(why);
}

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isStringArray(v: unknown): v is string[] {
  return Array.isArray(v) && v.every((s) => typeof s === "string");
}

function isPointPairs(v: unknown): v is [number, number][] {
  return (
    Array.isArray(v) &&
    v.every(
      (p) =>
        Array.isArray(p) &&
        p.length === 2 &&
        isFiniteNumber(p[0]) &&
        isFiniteNumber(p[1]),
    )
  );
}

/** Parse and validate one server frame; throws ProtocolError on junk. */
export function parseServerMessage(text: string): ServerMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    fail("frame is not JSON");
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    fail("frame is not an object");
  }
  const msg = raw as Record<string, unknown>;
  switch (msg.type) {
    case "started":
      if (typeof msg.session_id !== "string" || !isStringArray(msg.classes)) {
        fail("bad started frame");
      }
      return { type: "started", session_id: msg.session_id, classes: msg.classes };
    case "trail":
      if (!isPointPairs(msg.points)) fail("bad trail frame");
      return { type: "trail", points: msg.points };
    case "prediction":
      if (
        !Array.isArray(msg.probs) ||
        !msg.probs.every(isFiniteNumber) ||
        typeof msg.decision !== "string" ||
        !isFiniteNumber(msg.confidence) ||
        !isFiniteNumber(msg.latency_ms)
      ) {
        fail("bad prediction frame");
      }
      return {
        type: "prediction",
        probs: msg.probs as number[],
        decision: msg.decision,
        confidence: msg.confidence,
        latency_ms: msg.latency_ms,
      };
    case "config":
      if (!isFiniteNumber(msg.threshold) || typeof msg.mode !== "string") {
        fail("bad config frame");
      }
      return { type: "config", threshold: msg.threshold, mode: msg.mode };
    case "error":
      if (typeof msg.code !== "string" || typeof msg.message !== "string") {
        fail("bad error frame");
      }
      return { type: "error", code: msg.code, message: msg.message };
    default:
      fail(`unknown frame type ${String(msg.type)}`);
  }
}

export function encodeClientMessage(msg: ClientMessage): string {
  if (msg.type === "point") {
    if (!isFiniteNumber(msg.x) || !isFiniteNumber(msg.y) || !isFiniteNumber(msg.t_ms)) {
      fail("point needs finite x, y, t_ms");
    }
    if (msg.x < 0 || msg.x > 1 || msg.y < 0 || msg.y > 1) {
      fail("point coordinates must be normalized to [0,1]");
    }
  }
  if (msg.type === "config" && msg.threshold !== undefined) {
    if (!isFiniteNumber(msg.threshold) || msg.threshold < 0 || msg.threshold > 1) {
      fail("threshold must be in [0,1]");
    }
  }
  return JSON.stringify(msg);
}

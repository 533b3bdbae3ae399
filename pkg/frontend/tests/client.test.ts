import { describe, expect, it } from "vitest";
import { GestureClient } from "../src/client.js";
import { ServerMessage } from "../src/protocol.js";
import { FakeTransport } from "./fake-transport.js";

function makeClient(handlers = {}) {
  const transport = new FakeTransport();
  const client = new GestureClient("ws://test/ws", handlers, () => transport);
  return { client, transport };
}

describe("GestureClient", () => {
  it("queues messages until the transport opens", () => {
    const { client, transport } = makeClient();
    client.start("hint");
    client.sendPoint(0.5, 0.5, 10);
    expect(transport.sent).toHaveLength(0);
    transport.open();
    expect(transport.sentJson().map((m) => m.type)).toEqual(["start", "point"]);
  });

  it("sends immediately once open", () => {
    const { client, transport } = makeClient();
    transport.open();
    client.endStroke();
    expect(transport.sentJson()).toEqual([{ type: "end" }]);
  });

  it("clamps pointer coordinates into [0,1] and rounds timestamps", () => {
    const { client, transport } = makeClient();
    transport.open();
    client.sendPoint(-0.2, 1.7, 10.6);
    expect(transport.sentJson()[0]).toEqual({ type: "point", x: 0, y: 1, t_ms: 11 });
  });

  it("records session id and classes from started", () => {
    const { client, transport } = makeClient();
    transport.open();
    transport.push({ type: "started", session_id: "canvas-3", classes: ["A", "B"] });
    expect(client.sessionId).toBe("canvas-3");
    expect(client.classes).toEqual(["A", "B"]);
  });

  it("delivers parsed frames to the handler", () => {
    const seen: ServerMessage[] = [];
    const { transport } = makeClient({ onServerMessage: (m: ServerMessage) => seen.push(m) });
    transport.open();
    transport.push({ type: "trail", points: [[0.1, 0.1]] });
    transport.push({
      type: "prediction", probs: [1], decision: "Circle", confidence: 0.9, latency_ms: 3,
    });
    expect(seen.map((m) => m.type)).toEqual(["trail", "prediction"]);
  });

  it("reports junk frames without breaking the session", () => {
    const errors: Error[] = [];
    const seen: ServerMessage[] = [];
    const { transport } = makeClient({
      onServerMessage: (m: ServerMessage) => seen.push(m),
      onProtocolError: (e: Error) => errors.push(e),
    });
    transport.open();
    transport.push("{not json");
    transport.push({ type: "trail", points: [[0.2, 0.2]] });
    expect(errors).toHaveLength(1);
    expect(seen.map((m) => m.type)).toEqual(["trail"]);
  });

  it("sends config with threshold", () => {
    const { client, transport } = makeClient();
    transport.open();
    client.configure(0.6, "manual");
    expect(transport.sentJson()).toEqual([{ type: "config", threshold: 0.6, mode: "manual" }]);
  });

  it("signals close", () => {
    let closed = false;
    const { transport } = makeClient({ onClose: () => (closed = true) });
    transport.close();
    expect(closed).toBe(true);
  });
});

import { describe, expect, it } from "vitest";

import { drainSseBuffer, readSseStream } from "../src/sse.js";

function streamOf(chunks: string[], delayMs = 0): ReadableStream<Uint8Array> {
  const encoder = new TextEncoder();
  return new ReadableStream<Uint8Array>({
    async start(controller) {
      for (const chunk of chunks) {
        if (delayMs > 0) {
          await new Promise((resolve) => setTimeout(resolve, delayMs));
        }
        controller.enqueue(encoder.encode(chunk));
      }
      controller.close();
    },
  });
}

describe("drainSseBuffer", () => {
  it("parses complete event blocks and keeps the tail", () => {
    const { events, rest } = drainSseBuffer(
      'event: token\ndata: {"text": "a"}\n\nevent: done\ndata: {}\n\nevent: tok',
    );
    expect(events).toEqual([
      { event: "token", data: '{"text": "a"}' },
      { event: "done", data: "{}" },
    ]);
    expect(rest).toBe("event: tok");
  });

  it("joins multiple data lines with newlines", () => {
    const { events } = drainSseBuffer("event: x\ndata: line1\ndata: line2\n\n");
    expect(events[0].data).toBe("line1\nline2");
  });

  it("defaults the event name to message", () => {
    const { events } = drainSseBuffer("data: 1\n\n");
    expect(events[0].event).toBe("message");
  });

  it("accepts CRLF separators", () => {
    const { events } = drainSseBuffer('event: token\r\ndata: {"text": "a"}\r\n\r\n');
    expect(events).toHaveLength(1);
  });

  it("ignores blocks without data", () => {
    const { events } = drainSseBuffer("event: ping\n\n");
    expect(events).toHaveLength(0);
  });
});

describe("readSseStream", () => {
  it("dispatches events split across arbitrary chunk boundaries", async () => {
    const raw = 'event: token\ndata: {"text": "Hello "}\n\nevent: token\ndata: {"text": "world"}\n\nevent: done\ndata: {}\n\n';
    const pieces = [raw.slice(0, 13), raw.slice(13, 29), raw.slice(29, 61), raw.slice(61)];
    const seen: string[] = [];
    await readSseStream(streamOf(pieces), (event) => seen.push(event.event));
    expect(seen).toEqual(["token", "token", "done"]);
  });

  it("flushes a final event that lacks the trailing blank line", async () => {
    const seen: string[] = [];
    await readSseStream(streamOf(['event: done\ndata: {"ok": true}']), (e) => seen.push(e.event));
    expect(seen).toEqual(["done"]);
  });

  it("handles multi-byte characters across chunk splits", async () => {
    const encoder = new TextEncoder();
    const bytes = encoder.encode('event: token\ndata: {"text": "Übung"}\n\n');
    const mid = 24; // split inside the payload
    const stream = new ReadableStream<Uint8Array>({
      start(controller) {
        controller.enqueue(bytes.slice(0, mid));
        controller.enqueue(bytes.slice(mid));
        controller.close();
      },
    });
    const texts: string[] = [];
    await readSseStream(stream, (e) => texts.push(JSON.parse(e.data).text));
    expect(texts).toEqual(["Übung"]);
  });
});

/** Minimal server-sent-events reader over a streaming fetch response body. */

export interface SseEvent {
  event: string;
  data: string;
}

/**
 * Split a raw SSE buffer into complete events, returning the unconsumed tail.
 * Events are blocks separated by a blank line; `event:` names the event and
 * one or more `data:` lines carry the payload.
 */
export function drainSseBuffer(buffer: string): { events: SseEvent[]; rest: string } {
  const events: SseEvent[] = [];
  const normalized = buffer.replace(/\r\n/g, "\n");
  const blocks = normalized.split("\n\n");
  const rest = blocks.pop() ?? "";
  for (const block of blocks) {
    let event = "message";
    const data: string[] = [];
    for (const line of block.split("\n")) {
      if (line.startsWith("event:")) {
        event = line.slice("event:".length).trim();
      } else if (line.startsWith("data:")) {
        data.push(line.slice("data:".length).trimStart());
      }
    }
    if (data.length > 0) {
      events.push({ event, data: data.join("\n") });
    }
  }
  return { events, rest };
}

/** Read a streaming response body and invoke `onEvent` for each SSE event as it completes. */
export async function readSseStream(
  body: ReadableStream<Uint8Array>,
  onEvent: (event: SseEvent) => void,
): Promise<void> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  for (;;) {
    const { done, value } = await reader.read();
    if (done) {
      break;
    }
    buffer += decoder.decode(value, { stream: true });
    const { events, rest } = drainSseBuffer(buffer);
    buffer = rest;
    for (const event of events) {
      onEvent(event);
    }
  }
  // a final block without a trailing blank line still counts
  const { events } = drainSseBuffer(buffer + "\n\n");
  for (const event of events) {
    onEvent(event);
  }
}

import type {
  EventFrame,
  MacroDoc,
  ActionDoc,
  PressAck,
  PressBody,
  ReportDoc,
  StateDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function requestJson<T>(input: string, init?: RequestInit): Promise<T> {
  const response = await fetch(input, init);
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.error === "string") detail = body.error;
    } catch {
      // non-JSON error body, keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

/**
 * Split a byte stream into newline-delimited JSON values. Handles values
 * split across chunks and chunks carrying several lines.
 */
export async function* readNdjson(
  stream: ReadableStream<Uint8Array>,
): AsyncGenerator<unknown> {
  const reader = stream.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let newline;
      while ((newline = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, newline).trim();
        buffer = buffer.slice(newline + 1);
        if (line) yield JSON.parse(line);
      }
    }
    const tail = (buffer + decoder.decode()).trim();
    if (tail) yield JSON.parse(tail);
  } finally {
    reader.releaseLock();
  }
}

export class StripApi {
  constructor(readonly base: string = "") {}

  state(): Promise<StateDoc> {
    return requestJson<StateDoc>(`${this.base}/state`);
  }

  report(): Promise<ReportDoc> {
    return requestJson<ReportDoc>(`${this.base}/report`);
  }

  press(body: PressBody): Promise<PressAck> {
    return requestJson<PressAck>(`${this.base}/press`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  programMacro(id: number, body: ActionDoc[]): Promise<{ macros: MacroDoc[] }> {
    return requestJson(`${this.base}/macros`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ id, body }),
    });
  }

  tick(seconds: number): Promise<{ frame: EventFrame }> {
    return requestJson(`${this.base}/tick`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ seconds }),
    });
  }

  /** Follow the live frame stream, optionally resuming after a sequence number. */
  async *events(after?: number, signal?: AbortSignal): AsyncGenerator<EventFrame> {
    const query = after !== undefined ? `?after=${after}` : "";
    const response = await fetch(`${this.base}/events${query}`, { signal });
    if (!response.ok || !response.body) {
      throw new ApiError(response.status, "event stream unavailable");
    }
    for await (const value of readNdjson(response.body)) {
      yield value as EventFrame;
    }
  }
}

// Long-lived ndjson telemetry consumer with exponential-backoff reconnect.

import { NdjsonParser } from "./ndjson.js";
import { UiEvent } from "./state.js";
import { isTelemetryFrame } from "./types.js";

export interface TelemetryOptions {
  fetchImpl?: typeof fetch;
  minBackoffMs?: number;
  maxBackoffMs?: number;
  sleep?: (ms: number) => Promise<void>;
  signal?: AbortSignal;
}

const defaultSleep = (ms: number) =>
  new Promise<void>((resolve) => setTimeout(resolve, ms));

export async function consumeTelemetry(
  baseUrl: string,
  dispatch: (event: UiEvent) => void,
  options: TelemetryOptions = {},
): Promise<void> {
  const fetchImpl = options.fetchImpl ?? fetch;
  const minBackoff = options.minBackoffMs ?? 500;
  const maxBackoff = options.maxBackoffMs ?? 8000;
  const sleep = options.sleep ?? defaultSleep;
  const signal = options.signal;

  let backoff = minBackoff;
  while (!signal?.aborted) {
    dispatch({ kind: "connection", status: "connecting" });
    try {
      const resp = await fetchImpl(`${baseUrl}/telemetry`, { signal });
      if (!resp.ok || resp.body === null) {
        throw new Error(`telemetry stream -> ${resp.status}`);
      }
      dispatch({ kind: "connection", status: "live" });
      backoff = minBackoff;
      const reader = resp.body.getReader();
      const decoder = new TextDecoder();
      const parser = new NdjsonParser();
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        for (const record of parser.push(decoder.decode(value, { stream: true }))) {
          if (isTelemetryFrame(record)) {
            dispatch({ kind: "frame", frame: record });
          } else {
            console.warn("skipping non-frame telemetry record:", record);
          }
        }
      }
    } catch {
      // fall through to reconnect
    }
    if (signal?.aborted) break;
    dispatch({ kind: "connection", status: "lost" });
    await sleep(backoff);
    backoff = Math.min(backoff * 2, maxBackoff);
  }
}

// Incremental newline-delimited JSON parser. Chunks can split records at
// arbitrary byte boundaries, so we buffer until a full line arrives.

export class NdjsonParser {
  private buffer = "";

  /** Feed one chunk; returns every complete record it finished. */
  push(chunk: string): unknown[] {
    this.buffer += chunk;
    const out: unknown[] = [];
    let newline: number;
    while ((newline = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, newline).trim();
      this.buffer = this.buffer.slice(newline + 1);
      if (!line) continue;
      try {
        out.push(JSON.parse(line));
      } catch {
        console.warn("skipping malformed ndjson line:", line);
      }
    }
    return out;
  }
}

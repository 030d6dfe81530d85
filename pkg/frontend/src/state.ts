// UI state lives in one reducer so every screen element derives from the
// same event stream. Vehicle facts (pose, fix, estop, arrival, goal) come
// exclusively from telemetry frames; the UI never predicts locally.

import { GeoPoint, TelemetryFrame } from "./types.js";

export type ConnectionStatus = "connecting" | "live" | "lost";

export interface UiState {
  connection: ConnectionStatus;
  deviceLocation: GeoPoint | null;
  frame: TelemetryFrame | null;
  goal: GeoPoint | null;
  summonInFlight: boolean;
  banner: string | null;
}

export const initialState: UiState = {
  connection: "connecting",
  deviceLocation: null,
  frame: null,
  goal: null,
  summonInFlight: false,
  banner: null,
};

export type UiEvent =
  | { kind: "connection"; status: ConnectionStatus }
  | { kind: "frame"; frame: TelemetryFrame }
  | { kind: "mapClick"; location: GeoPoint }
  | { kind: "summonSent" }
  | { kind: "summonOk"; goal: GeoPoint }
  | { kind: "summonFailed"; message: string }
  | { kind: "estopFailed"; message: string };

export function reduce(state: UiState, event: UiEvent): UiState {
  switch (event.kind) {
    case "connection":
      return { ...state, connection: event.status };
    case "frame":
      return {
        ...state,
        frame: event.frame,
        // the server's goal is authoritative once it appears in telemetry
        goal: event.frame.goal ?? state.goal,
      };
    case "mapClick":
      return { ...state, deviceLocation: event.location, banner: null };
    case "summonSent":
      return { ...state, summonInFlight: true, banner: null };
    case "summonOk":
      return { ...state, summonInFlight: false, goal: event.goal };
    case "summonFailed":
      return { ...state, summonInFlight: false, banner: event.message };
    case "estopFailed":
      return { ...state, banner: event.message };
  }
}

export function summonEnabled(state: UiState): boolean {
  return (
    state.deviceLocation !== null &&
    state.connection === "live" &&
    !state.summonInFlight
  );
}

/**
 * Wrap the summon POST so one button activation sends exactly one request:
 * re-entry while a request is in flight is a no-op.
 */
export function createSummonAction(
  send: (location: GeoPoint) => Promise<void>,
  getState: () => UiState,
  dispatch: (event: UiEvent) => void,
): () => Promise<void> {
  return async () => {
    const state = getState();
    if (!summonEnabled(state) || state.deviceLocation === null) return;
    const location = state.deviceLocation;
    dispatch({ kind: "summonSent" });
    try {
      await send(location);
      dispatch({ kind: "summonOk", goal: location });
    } catch (err) {
      dispatch({ kind: "summonFailed", message: `summon failed: ${err}` });
    }
  };
}

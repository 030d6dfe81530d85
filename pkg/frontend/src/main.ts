import { postEstop, postSummon } from "./api.js";
import { canvasToGeo, render, viewFor } from "./map.js";
import {
  UiEvent,
  UiState,
  createSummonAction,
  initialState,
  reduce,
  summonEnabled,
} from "./state.js";
import { consumeTelemetry } from "./telemetry.js";

const BASE_URL = "";

const canvas = document.getElementById("map") as HTMLCanvasElement | null;
if (!canvas) throw new Error("canvas #map not found");
const ctx = canvas.getContext("2d");
if (!ctx) throw new Error("2D context unavailable");

const summonBtn = document.getElementById("summon") as HTMLButtonElement;
const estopBtn = document.getElementById("estop") as HTMLButtonElement;
const estopResetBtn = document.getElementById("estop-reset") as HTMLButtonElement;
const banner = document.getElementById("banner") as HTMLDivElement;
const badges = {
  connection: document.getElementById("badge-connection") as HTMLSpanElement,
  fix: document.getElementById("badge-fix") as HTMLSpanElement,
  estop: document.getElementById("badge-estop") as HTMLSpanElement,
  arrived: document.getElementById("badge-arrived") as HTMLSpanElement,
};
const readout = document.getElementById("readout") as HTMLDivElement;

let state: UiState = initialState;

function dispatch(event: UiEvent): void {
  state = reduce(state, event);
  draw();
}

function draw(): void {
  render(ctx!, state, canvas!.width, canvas!.height);

  summonBtn.disabled = !summonEnabled(state);
  banner.textContent = state.banner ?? "";
  banner.hidden = state.banner === null;

  badges.connection.textContent = state.connection;
  badges.connection.className = `badge ${state.connection === "live" ? "ok" : "warn"}`;
  const frame = state.frame;
  badges.fix.textContent = frame ? `fix: ${frame.fix}` : "fix: –";
  badges.fix.className = `badge ${frame?.fix === "RTK" ? "ok" : frame?.fix === "SPP" ? "warn" : "err"}`;
  badges.estop.textContent = frame?.estop ? "E-STOP" : "estop clear";
  badges.estop.className = `badge ${frame?.estop ? "err" : "ok"}`;
  badges.arrived.hidden = !frame?.arrived;

  if (frame) {
    readout.textContent =
      `t=${frame.sim_time.toFixed(1)}s ` +
      `vehicle ${frame.vehicle.latitude.toFixed(6)}, ${frame.vehicle.longitude.toFixed(6)}`;
  }
}

canvas.addEventListener("click", (ev) => {
  const view = viewFor(state);
  if (view === null) return;
  const rect = canvas.getBoundingClientRect();
  const location = canvasToGeo(
    view,
    ev.clientX - rect.left,
    ev.clientY - rect.top,
    canvas.width,
    canvas.height,
  );
  dispatch({ kind: "mapClick", location });
});

const summon = createSummonAction(
  (location) => postSummon(BASE_URL, location),
  () => state,
  dispatch,
);
summonBtn.addEventListener("click", () => void summon());

estopBtn.addEventListener("click", () => {
  postEstop(BASE_URL, true).catch((err) =>
    dispatch({ kind: "estopFailed", message: `estop failed: ${err}` }),
  );
});
estopResetBtn.addEventListener("click", () => {
  postEstop(BASE_URL, false, true).catch((err) =>
    dispatch({ kind: "estopFailed", message: `estop reset failed: ${err}` }),
  );
});

draw();
void consumeTelemetry(BASE_URL, dispatch);

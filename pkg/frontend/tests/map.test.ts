import { describe, expect, it } from "vitest";

import { canvasToGeo, geoToCanvas, viewFor } from "../src/map.js";
import { initialState, reduce } from "../src/state.js";
import { TelemetryFrame } from "../src/types.js";

const VEHICLE = { latitude: 42.47, longitude: -83.25, heading: 0.0 };

function stateWithVehicle() {
  const frame: TelemetryFrame = {
    sim_time: 1.0,
    vehicle: VEHICLE,
    goal: null,
    fix: "RTK",
    estop: false,
    arrived: false,
    obstacles_nearby: false,
  };
  return reduce(initialState, { kind: "frame", frame });
}

describe("viewFor", () => {
  it("is null with nothing to anchor on", () => {
    expect(viewFor(initialState)).toBeNull();
  });

  it("centers on the vehicle when telemetry is up", () => {
    const view = viewFor(stateWithVehicle())!;
    expect(view.zone).toBe(17);
    expect(view.centerEasting).toBeCloseTo(315033.573793, 3);
    expect(view.centerNorthing).toBeCloseTo(4704414.805229, 3);
  });

  it("falls back to the clicked device location", () => {
    const s = reduce(initialState, {
      kind: "mapClick",
      location: { latitude: 42.47, longitude: -83.25 },
    });
    expect(viewFor(s)).not.toBeNull();
  });
});

describe("canvas projection", () => {
  const W = 1200;
  const H = 800;

  it("puts the anchor at the canvas center", () => {
    const view = viewFor(stateWithVehicle())!;
    const p = geoToCanvas(view, VEHICLE, W, H);
    expect(p.x).toBeCloseTo(W / 2, 6);
    expect(p.y).toBeCloseTo(H / 2, 6);
  });

  it("round-trips a click through geo and back within a pixel", () => {
    const view = viewFor(stateWithVehicle())!;
    for (const [x, y] of [[100, 50], [600, 400], [1150, 790]]) {
      const geo = canvasToGeo(view, x, y, W, H);
      const p = geoToCanvas(view, geo, W, H);
      expect(p.x).toBeCloseTo(x, 3);
      expect(p.y).toBeCloseTo(y, 3);
    }
  });

  it("maps north to up and east to right", () => {
    const view = viewFor(stateWithVehicle())!;
    const north = canvasToGeo(view, W / 2, H / 2 - 100, W, H);
    const east = canvasToGeo(view, W / 2 + 100, H / 2, W, H);
    expect(north.latitude).toBeGreaterThan(VEHICLE.latitude);
    expect(east.longitude).toBeGreaterThan(VEHICLE.longitude);
  });
});

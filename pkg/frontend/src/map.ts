// Plain planar canvas map in UTM meters: no tiles, works offline.

import { UtmPoint, utmToWgs84, wgs84ToUtm } from "./geodesy.js";
import { UiState } from "./state.js";
import { GeoPoint } from "./types.js";

export interface MapView {
  centerEasting: number;
  centerNorthing: number;
  zone: number;
  hemisphere: "N" | "S";
  metersPerPixel: number;
}

/** Center on the vehicle when telemetry is up, else on the clicked location. */
export function viewFor(state: UiState, metersPerPixel = 0.5): MapView | null {
  const anchor: GeoPoint | null = state.frame?.vehicle ?? state.deviceLocation;
  if (anchor === null) return null;
  const u = wgs84ToUtm(anchor.latitude, anchor.longitude);
  return {
    centerEasting: u.easting,
    centerNorthing: u.northing,
    zone: u.zone,
    hemisphere: u.hemisphere,
    metersPerPixel,
  };
}

export function geoToCanvas(
  view: MapView,
  geo: GeoPoint,
  width: number,
  height: number,
): { x: number; y: number } {
  const u = wgs84ToUtm(geo.latitude, geo.longitude);
  return {
    x: width / 2 + (u.easting - view.centerEasting) / view.metersPerPixel,
    y: height / 2 - (u.northing - view.centerNorthing) / view.metersPerPixel,
  };
}

export function canvasToGeo(
  view: MapView,
  x: number,
  y: number,
  width: number,
  height: number,
): GeoPoint {
  const p: UtmPoint = {
    easting: view.centerEasting + (x - width / 2) * view.metersPerPixel,
    northing: view.centerNorthing - (y - height / 2) * view.metersPerPixel,
    zone: view.zone,
    hemisphere: view.hemisphere,
  };
  return utmToWgs84(p);
}

function drawGrid(
  ctx: CanvasRenderingContext2D,
  view: MapView,
  width: number,
  height: number,
): void {
  const spacingM = 10;
  const spacingPx = spacingM / view.metersPerPixel;
  ctx.strokeStyle = "#e3e8ee";
  ctx.lineWidth = 1;
  const offsetX = (width / 2 - (view.centerEasting / view.metersPerPixel) % spacingPx) % spacingPx;
  const offsetY = (height / 2 + (view.centerNorthing / view.metersPerPixel) % spacingPx) % spacingPx;
  for (let x = offsetX; x < width; x += spacingPx) {
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, height);
    ctx.stroke();
  }
  for (let y = offsetY; y < height; y += spacingPx) {
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(width, y);
    ctx.stroke();
  }
}

export function render(
  ctx: CanvasRenderingContext2D,
  state: UiState,
  width: number,
  height: number,
): MapView | null {
  ctx.clearRect(0, 0, width, height);
  const view = viewFor(state);
  if (view === null) {
    ctx.fillStyle = "#6b7280";
    ctx.font = "14px sans-serif";
    ctx.fillText("waiting for telemetry; click to set your location", 16, height / 2);
    return null;
  }
  drawGrid(ctx, view, width, height);

  if (state.deviceLocation) {
    const p = geoToCanvas(view, state.deviceLocation, width, height);
    ctx.fillStyle = "#2563eb";
    ctx.beginPath();
    ctx.arc(p.x, p.y, 6, 0, 2 * Math.PI);
    ctx.fill();
  }

  if (state.goal) {
    const p = geoToCanvas(view, state.goal, width, height);
    ctx.strokeStyle = "#dc2626";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(p.x - 8, p.y);
    ctx.lineTo(p.x + 8, p.y);
    ctx.moveTo(p.x, p.y - 8);
    ctx.lineTo(p.x, p.y + 8);
    ctx.stroke();
  }

  if (state.frame) {
    const v = state.frame.vehicle;
    const p = geoToCanvas(view, v, width, height);
    ctx.save();
    ctx.translate(p.x, p.y);
    // compass heading: 0 = north = up on canvas, clockwise positive
    ctx.rotate(v.heading);
    ctx.fillStyle = state.frame.estop ? "#dc2626" : "#16a34a";
    ctx.beginPath();
    ctx.moveTo(0, -12);
    ctx.lineTo(7, 10);
    ctx.lineTo(-7, 10);
    ctx.closePath();
    ctx.fill();
    ctx.restore();
  }
  return view;
}

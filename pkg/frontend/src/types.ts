export interface GeoPoint {
  latitude: number;
  longitude: number;
}

export interface VehiclePose {
  latitude: number;
  longitude: number;
  heading: number; // compass rad: 0 = north, clockwise positive
}

export interface TelemetryFrame {
  sim_time: number;
  vehicle: VehiclePose;
  goal: GeoPoint | null;
  fix: "RTK" | "SPP" | "NONE";
  estop: boolean;
  arrived: boolean;
  obstacles_nearby: boolean;
}

export function isTelemetryFrame(value: unknown): value is TelemetryFrame {
  if (typeof value !== "object" || value === null) return false;
  const v = value as Record<string, unknown>;
  const vehicle = v.vehicle as Record<string, unknown> | undefined;
  return (
    typeof v.sim_time === "number" &&
    typeof vehicle === "object" &&
    vehicle !== null &&
    typeof vehicle.latitude === "number" &&
    typeof vehicle.longitude === "number" &&
    typeof vehicle.heading === "number" &&
    (v.goal === null ||
      (typeof v.goal === "object" &&
        typeof (v.goal as Record<string, unknown>).latitude === "number")) &&
    (v.fix === "RTK" || v.fix === "SPP" || v.fix === "NONE") &&
    typeof v.estop === "boolean" &&
    typeof v.arrived === "boolean" &&
    typeof v.obstacles_nearby === "boolean"
  );
}

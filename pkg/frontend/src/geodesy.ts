// WGS84 <-> UTM, 6th-order Krueger series. Same math as the backend, so a
// lat/lon round-tripped through a map click lands on the same UTM point to
// well under a millimeter.

export interface UtmPoint {
  easting: number;
  northing: number;
  zone: number;
  hemisphere: "N" | "S";
}

const A = 6378137.0;
const F = 1.0 / 298.257223563;
const K0 = 0.9996;
const FALSE_EASTING = 500000.0;
const FALSE_NORTHING_S = 10000000.0;

const n = F / (2.0 - F);
const E = Math.sqrt(F * (2.0 - F));
const A_RECT =
  (A / (1 + n)) * (1 + n ** 2 / 4 + n ** 4 / 64 + n ** 6 / 256);

const ALPHA = [
  n / 2 - (2 * n ** 2) / 3 + (5 * n ** 3) / 16 + (41 * n ** 4) / 180 -
    (127 * n ** 5) / 288 + (7891 * n ** 6) / 37800,
  (13 * n ** 2) / 48 - (3 * n ** 3) / 5 + (557 * n ** 4) / 1440 +
    (281 * n ** 5) / 630 - (1983433 * n ** 6) / 1935360,
  (61 * n ** 3) / 240 - (103 * n ** 4) / 140 + (15061 * n ** 5) / 26880 +
    (167603 * n ** 6) / 181440,
  (49561 * n ** 4) / 161280 - (179 * n ** 5) / 168 +
    (6601661 * n ** 6) / 7257600,
  (34729 * n ** 5) / 80640 - (3418889 * n ** 6) / 1995840,
  (212378941 * n ** 6) / 319334400,
];

const BETA = [
  n / 2 - (2 * n ** 2) / 3 + (37 * n ** 3) / 96 - n ** 4 / 360 -
    (81 * n ** 5) / 512 + (96199 * n ** 6) / 604800,
  n ** 2 / 48 + n ** 3 / 15 - (437 * n ** 4) / 1440 + (46 * n ** 5) / 105 -
    (1118711 * n ** 6) / 3870720,
  (17 * n ** 3) / 480 - (37 * n ** 4) / 840 - (209 * n ** 5) / 4480 +
    (5569 * n ** 6) / 90720,
  (4397 * n ** 4) / 161280 - (11 * n ** 5) / 504 - (830251 * n ** 6) / 7257600,
  (4583 * n ** 5) / 161280 - (108847 * n ** 6) / 3991680,
  (20648693 * n ** 6) / 638668800,
];

function hypot(a: number, b: number): number {
  return Math.sqrt(a * a + b * b);
}

export function utmZone(longitude: number): number {
  if (longitude === 180.0) longitude = -180.0;
  const zone = Math.floor((longitude + 180.0) / 6.0) + 1;
  return Math.min(Math.max(zone, 1), 60);
}

export function zoneCentralMeridian(zone: number): number {
  return (zone - 1) * 6.0 - 180.0 + 3.0;
}

export function wgs84ToUtm(latitude: number, longitude: number): UtmPoint {
  if (!Number.isFinite(latitude) || !Number.isFinite(longitude)) {
    throw new Error("non-finite coordinates");
  }
  if (latitude < -80.0 || latitude > 84.0) {
    throw new Error(`latitude ${latitude} outside UTM band [-80, 84]`);
  }
  const zone = utmZone(longitude);
  const lam0 = (zoneCentralMeridian(zone) * Math.PI) / 180.0;
  const phi = (latitude * Math.PI) / 180.0;
  const lam = (longitude * Math.PI) / 180.0 - lam0;

  const s = (2 * Math.sqrt(n)) / (1 + n);
  const t = Math.sinh(
    Math.atanh(Math.sin(phi)) - s * Math.atanh(s * Math.sin(phi)),
  );
  const xiP = Math.atan2(t, Math.cos(lam));
  const etaP = Math.asinh(Math.sin(lam) / hypot(t, Math.cos(lam)));

  let xi = xiP;
  let eta = etaP;
  for (let j = 1; j <= ALPHA.length; j++) {
    xi += ALPHA[j - 1] * Math.sin(2 * j * xiP) * Math.cosh(2 * j * etaP);
    eta += ALPHA[j - 1] * Math.cos(2 * j * xiP) * Math.sinh(2 * j * etaP);
  }

  const easting = FALSE_EASTING + K0 * A_RECT * eta;
  let northing = K0 * A_RECT * xi;
  let hemisphere: "N" | "S" = latitude >= 0 ? "N" : "S";
  if (hemisphere === "S") {
    northing += FALSE_NORTHING_S;
    if (northing >= FALSE_NORTHING_S) {
      hemisphere = "N";
      northing = 0.0;
    }
  }
  return { easting, northing, zone, hemisphere };
}

export function utmToWgs84(p: UtmPoint): { latitude: number; longitude: number } {
  let northing = p.northing;
  if (p.hemisphere === "S") northing -= FALSE_NORTHING_S;
  const xi = northing / (K0 * A_RECT);
  const eta = (p.easting - FALSE_EASTING) / (K0 * A_RECT);

  let xiP = xi;
  let etaP = eta;
  for (let j = 1; j <= BETA.length; j++) {
    xiP -= BETA[j - 1] * Math.sin(2 * j * xi) * Math.cosh(2 * j * eta);
    etaP -= BETA[j - 1] * Math.cos(2 * j * xi) * Math.sinh(2 * j * eta);
  }

  const tauP = Math.sin(xiP) / hypot(Math.sinh(etaP), Math.cos(xiP));

  let tau = tauP;
  for (let i = 0; i < 8; i++) {
    const sigma = Math.sinh(E * Math.atanh((E * tau) / hypot(1.0, tau)));
    const f = tau * hypot(1.0, sigma) - sigma * hypot(1.0, tau) - tauP;
    const df =
      ((hypot(1.0, sigma) * hypot(1.0, tau) - sigma * tau) *
        (1.0 - E * E) *
        hypot(1.0, tau)) /
      (1.0 + (1.0 - E * E) * tau * tau);
    const step = f / df;
    tau -= step;
    if (Math.abs(step) < 1e-16 * Math.max(1.0, Math.abs(tau))) break;
  }

  const phi = Math.atan(tau);
  const lam = Math.atan2(Math.sinh(etaP), Math.cos(xiP));
  return {
    latitude: (phi * 180.0) / Math.PI,
    longitude: (lam * 180.0) / Math.PI + zoneCentralMeridian(p.zone),
  };
}

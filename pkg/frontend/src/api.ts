import { GeoPoint } from "./types.js";

export class ApiError extends Error {
  constructor(public readonly status: number, message: string) {
    super(message);
  }
}

/** The exact summon wire body: latitude/longitude keys only. */
export function summonBody(location: GeoPoint): string {
  return JSON.stringify({
    latitude: location.latitude,
    longitude: location.longitude,
  });
}

async function post(
  url: string,
  body: string,
  fetchImpl: typeof fetch,
): Promise<void> {
  const resp = await fetchImpl(url, { method: "POST", body });
  if (!resp.ok) {
    throw new ApiError(resp.status, `POST ${url} -> ${resp.status}`);
  }
}

export function postSummon(
  baseUrl: string,
  location: GeoPoint,
  fetchImpl: typeof fetch = fetch,
): Promise<void> {
  return post(`${baseUrl}/summon`, summonBody(location), fetchImpl);
}

export function postEstop(
  baseUrl: string,
  on: boolean,
  reset = false,
  fetchImpl: typeof fetch = fetch,
): Promise<void> {
  const body = reset ? { on, reset: true } : { on };
  return post(`${baseUrl}/estop`, JSON.stringify(body), fetchImpl);
}

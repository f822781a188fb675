import { LonLat, RouteCollection, SceneInfo } from './types.js';

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(`HTTP ${status}: ${JSON.stringify(detail)}`);
  }
}

async function asJson(resp: Response): Promise<unknown> {
  const body = await resp.json().catch(() => null);
  if (!resp.ok) {
    throw new ApiError(resp.status, body && (body as { detail?: unknown }).detail);
  }
  return body;
}

/** Thin client over the shade service; all access goes through HTTP. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...a) => fetch(...a),
  ) {}

  async uploadScene(buildings: Blob, roads: Blob): Promise<SceneInfo> {
    const form = new FormData();
    form.append('buildings', buildings, 'buildings.geojson');
    form.append('roads', roads, 'roads.geojson');
    const resp = await this.fetchImpl(`${this.baseUrl}/scenes`, {
      method: 'POST',
      body: form,
    });
    return (await asJson(resp)) as SceneInfo;
  }

  async getScene(sceneId: string): Promise<SceneInfo> {
    const resp = await this.fetchImpl(`${this.baseUrl}/scenes/${sceneId}`);
    return (await asJson(resp)) as SceneInfo;
  }

  /** URL of the shade PNG; loading it (e.g. into an <img>) is the request. */
  shadeUrl(sceneId: string, date: string, hour: number): string {
    const q = new URLSearchParams({ date, hour: String(hour) });
    return `${this.baseUrl}/scenes/${sceneId}/shade?${q.toString()}`;
  }

  async getShadeSidecar(
    sceneId: string,
    date: string,
    hour: number,
  ): Promise<{ bounds: [number, number, number, number]; sun: { elevation_deg: number } }> {
    const q = new URLSearchParams({ date, hour: String(hour) });
    const resp = await this.fetchImpl(
      `${this.baseUrl}/scenes/${sceneId}/shade/sidecar?${q.toString()}`,
    );
    return (await asJson(resp)) as {
      bounds: [number, number, number, number];
      sun: { elevation_deg: number };
    };
  }

  async route(
    sceneId: string,
    from: LonLat,
    to: LonLat,
    w: number,
    date: string,
    hour: number,
  ): Promise<RouteCollection> {
    const resp = await this.fetchImpl(`${this.baseUrl}/scenes/${sceneId}/route`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ from, to, w, date, hour }),
    });
    return (await asJson(resp)) as RouteCollection;
  }
}

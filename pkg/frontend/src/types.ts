export type LonLat = [number, number];

/** [minLon, minLat, maxLon, maxLat] */
export type Bounds = [number, number, number, number];

export interface SceneInfo {
  scene_id: string;
  buildings: number;
  road_nodes: number;
  road_edges: number;
  bounds: Bounds;
}

export interface RouteProperties {
  kind: 'shaded' | 'shortest';
  length_m: number;
  exposure_m: number;
  mean_shade_ratio: number;
  cost: number;
  w: number;
}

export interface RouteFeature {
  type: 'Feature';
  properties: RouteProperties;
  geometry: { type: 'LineString'; coordinates: LonLat[] };
}

export interface RouteCollection {
  type: 'FeatureCollection';
  features: RouteFeature[];
}

/** Everything needed to reproduce a view; round-trips through the URL hash. */
export interface ViewState {
  sceneId: string | null;
  date: string;
  hour: number;
  w: number;
  from: LonLat | null;
  to: LonLat | null;
}

export const DEFAULT_STATE: ViewState = {
  sceneId: null,
  date: '2024-06-20',
  hour: 12,
  w: 0.5,
  from: null,
  to: null,
};

import { Bounds, LonLat, RouteFeature } from './types.js';

export interface Projection {
  toPx(p: LonLat): [number, number];
  toLonLat(x: number, y: number): LonLat;
}

/**
 * Fit geographic bounds into a canvas, preserving aspect ratio using the
 * equirectangular scale at the bounds' center latitude.
 */
export function fitProjection(bounds: Bounds, widthPx: number, heightPx: number): Projection {
  const [minLon, minLat, maxLon, maxLat] = bounds;
  const midLat = (minLat + maxLat) / 2;
  const lonScale = Math.cos((midLat * Math.PI) / 180);
  const spanX = (maxLon - minLon) * lonScale;
  const spanY = maxLat - minLat;
  const scale = Math.min(widthPx / spanX, heightPx / spanY);
  const offX = (widthPx - spanX * scale) / 2;
  const offY = (heightPx - spanY * scale) / 2;
  return {
    toPx([lon, lat]) {
      return [
        offX + (lon - minLon) * lonScale * scale,
        offY + (maxLat - lat) * scale,
      ];
    },
    toLonLat(x, y) {
      return [
        minLon + (x - offX) / (lonScale * scale),
        maxLat - (y - offY) / scale,
      ];
    },
  };
}

export const ROUTE_COLORS: Record<RouteFeature['properties']['kind'], string> = {
  shaded: '#2e7d32',
  shortest: '#c62828',
};

type StrokeContext = Pick<
  CanvasRenderingContext2D,
  'beginPath' | 'moveTo' | 'lineTo' | 'stroke'
> & { strokeStyle: string | CanvasGradient | CanvasPattern; lineWidth: number };

export function drawRoute(ctx: StrokeContext, feature: RouteFeature, proj: Projection): void {
  ctx.strokeStyle = ROUTE_COLORS[feature.properties.kind];
  ctx.lineWidth = feature.properties.kind === 'shaded' ? 4 : 2.5;
  ctx.beginPath();
  feature.geometry.coordinates.forEach((p, i) => {
    const [x, y] = proj.toPx(p);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}

export function formatMeters(m: number): string {
  return m >= 1000 ? `${(m / 1000).toFixed(2)} km` : `${Math.round(m)} m`;
}

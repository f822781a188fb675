import { DEFAULT_STATE, LonLat, ViewState } from './types.js';

/** Encode a view into a shareable URL hash ("#scene=...&hour=12&..."). */
export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.sceneId) params.set('scene', state.sceneId);
  params.set('date', state.date);
  params.set('hour', String(state.hour));
  params.set('w', String(state.w));
  if (state.from) params.set('from', state.from.join(','));
  if (state.to) params.set('to', state.to.join(','));
  return '#' + params.toString();
}

function parseLonLat(raw: string | null): LonLat | null {
  if (!raw) return null;
  const parts = raw.split(',').map(Number);
  if (parts.length !== 2 || parts.some((v) => !Number.isFinite(v))) return null;
  const [lon, lat] = parts;
  if (Math.abs(lon) > 180 || Math.abs(lat) > 90) return null;
  return [lon, lat];
}

function parseNumber(raw: string | null, fallback: number, lo: number, hi: number): number {
  const v = raw === null ? NaN : Number(raw);
  return Number.isFinite(v) && v >= lo && v <= hi ? v : fallback;
}

/** Decode a URL hash back into a view; invalid fields fall back to defaults. */
export function decodeState(hash: string): ViewState {
  const params = new URLSearchParams(hash.replace(/^#/, ''));
  const date = params.get('date');
  return {
    sceneId: params.get('scene'),
    date: date && /^\d{4}-\d{2}-\d{2}$/.test(date) ? date : DEFAULT_STATE.date,
    hour: parseNumber(params.get('hour'), DEFAULT_STATE.hour, 0, 23),
    w: parseNumber(params.get('w'), DEFAULT_STATE.w, 0, 1),
    from: parseLonLat(params.get('from')),
    to: parseLonLat(params.get('to')),
  };
}

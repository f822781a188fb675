import { ApiClient } from './api.js';
import { App, ShadeView } from './app.js';
import { Projection, drawRoute, fitProjection, formatMeters } from './render.js';
import { RouteCollection } from './types.js';

const API_BASE = (window as { SHADECAST_API?: string }).SHADECAST_API ?? 'http://127.0.0.1:8000';

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
};

const canvas = el<HTMLCanvasElement>('map');
const ctx = canvas.getContext('2d')!;
const hourSlider = el<HTMLInputElement>('hour');
const wSlider = el<HTMLInputElement>('w');
const hourLabel = el<HTMLSpanElement>('hour-label');
const wLabel = el<HTMLSpanElement>('w-label');
const statsBox = el<HTMLDivElement>('stats');
const statusBox = el<HTMLDivElement>('status');
const buildingsInput = el<HTMLInputElement>('buildings-file');
const roadsInput = el<HTMLInputElement>('roads-file');
const uploadBtn = el<HTMLButtonElement>('upload');

const api = new ApiClient(API_BASE);
const shadeImg = new Image();
let shade: ShadeView | null = null;
let routes: RouteCollection | null = null;
let proj: Projection | null = null;

function redraw(): void {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!shade) return;
  proj = fitProjection(shade.bounds, canvas.width, canvas.height);
  const [x0, y0] = proj.toPx([shade.bounds[0], shade.bounds[3]]);
  const [x1, y1] = proj.toPx([shade.bounds[2], shade.bounds[1]]);
  if (shadeImg.complete && shadeImg.naturalWidth > 0) {
    ctx.globalAlpha = 0.85;
    ctx.drawImage(shadeImg, x0, y0, x1 - x0, y1 - y0);
    ctx.globalAlpha = 1.0;
  }
  if (routes && proj) {
    for (const f of [...routes.features].reverse()) drawRoute(ctx, f, proj);
  }
  if (app.state.from && proj) drawMarker(app.state.from, '#1565c0');
  if (app.state.to && proj) drawMarker(app.state.to, '#6a1b9a');
}

function drawMarker(p: [number, number], color: string): void {
  const [x, y] = proj!.toPx(p);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(x, y, 6, 0, 2 * Math.PI);
  ctx.fill();
}

function showStats(): void {
  if (!routes) {
    statsBox.textContent = '';
    return;
  }
  statsBox.innerHTML = routes.features
    .map((f) => {
      const p = f.properties;
      const color = p.kind === 'shaded' ? '#2e7d32' : '#c62828';
      return (
        `<span style="color:${color}">${p.kind}</span>: ` +
        `${formatMeters(p.length_m)}, sun exposure ${formatMeters(p.exposure_m)}`
      );
    })
    .join('<br>');
}

const app = new App(
  api,
  {
    onState(state) {
      hourLabel.textContent = `${String(state.hour).padStart(2, '0')}:00`;
      wLabel.textContent = state.w.toFixed(2);
      window.location.hash = app.urlHash();
    },
    onShade(view) {
      shade = view;
      shadeImg.onload = redraw;
      shadeImg.src = view.pngUrl;
      statusBox.textContent = `sun elevation ${view.sunElevationDeg.toFixed(1)}°`;
      redraw();
    },
    onRoutes(r) {
      routes = r;
      showStats();
      redraw();
    },
    onError(err) {
      statusBox.textContent = String(err);
    },
  },
  { initialHash: window.location.hash },
);

hourSlider.value = String(app.state.hour);
wSlider.value = String(app.state.w);
hourSlider.addEventListener('input', () => app.setHour(Number(hourSlider.value)));
wSlider.addEventListener('input', () => app.setW(Number(wSlider.value)));

canvas.addEventListener('click', (ev) => {
  if (!proj) return;
  const rect = canvas.getBoundingClientRect();
  app.clickPoint(proj.toLonLat(ev.clientX - rect.left, ev.clientY - rect.top));
  redraw();
});

uploadBtn.addEventListener('click', async () => {
  const b = buildingsInput.files?.[0];
  const r = roadsInput.files?.[0];
  if (!b || !r) {
    statusBox.textContent = 'pick a buildings and a roads GeoJSON file first';
    return;
  }
  try {
    const info = await api.uploadScene(b, r);
    statusBox.textContent = `scene ${info.scene_id}: ${info.buildings} buildings`;
    app.setScene(info.scene_id);
  } catch (err) {
    statusBox.textContent = String(err);
  }
});

app.start();
app.flush();

import { ApiClient } from './api.js';
import { Debounced, debounce } from './debounce.js';
import { Bounds, LonLat, RouteCollection, ViewState } from './types.js';
import { decodeState, encodeState } from './url.js';

export interface ShadeView {
  pngUrl: string;
  bounds: Bounds;
  sunElevationDeg: number;
}

export interface AppCallbacks {
  onState?(state: ViewState): void;
  onShade?(view: ShadeView): void;
  onRoutes?(routes: RouteCollection | null): void;
  onError?(err: unknown): void;
}

export interface AppOptions {
  debounceMs?: number;
  initialHash?: string;
}

/**
 * View controller: owns the state, debounces server traffic, and keeps the
 * URL hash shareable. Pure of DOM concerns so it is unit-testable.
 */
export class App {
  readonly state: ViewState;
  private readonly scheduleShade: Debounced<[]>;
  private readonly scheduleRoute: Debounced<[]>;
  private shadeSeq = 0;
  private routeSeq = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly callbacks: AppCallbacks = {},
    options: AppOptions = {},
  ) {
    const wait = options.debounceMs ?? 250;
    this.state = decodeState(options.initialHash ?? '');
    this.scheduleShade = debounce(() => void this.fetchShade(), wait);
    this.scheduleRoute = debounce(() => void this.fetchRoute(), wait);
  }

  urlHash(): string {
    return encodeState(this.state);
  }

  /** Kick off initial loads for a state restored from a shared URL. */
  start(): void {
    if (this.state.sceneId) {
      this.scheduleShade();
      this.scheduleRoute();
    }
  }

  setScene(sceneId: string): void {
    this.state.sceneId = sceneId;
    this.emitState();
    this.scheduleShade();
    this.scheduleRoute();
  }

  setDate(date: string): void {
    this.state.date = date;
    this.emitState();
    this.scheduleShade();
    this.scheduleRoute();
  }

  setHour(hour: number): void {
    this.state.hour = hour;
    this.emitState();
    this.scheduleShade();
    this.scheduleRoute();
  }

  setW(w: number): void {
    this.state.w = w;
    this.emitState();
    this.scheduleRoute();
  }

  /** First click sets the origin, second the destination, third restarts. */
  clickPoint(point: LonLat): void {
    if (this.state.from === null || this.state.to !== null) {
      this.state.from = point;
      this.state.to = null;
      this.callbacks.onRoutes?.(null);
    } else {
      this.state.to = point;
      this.scheduleRoute();
    }
    this.emitState();
  }

  /** Force pending work to run now (used by tests and page-hide). */
  flush(): void {
    this.scheduleShade.flush();
    this.scheduleRoute.flush();
  }

  private emitState(): void {
    this.callbacks.onState?.(this.state);
  }

  private async fetchShade(): Promise<void> {
    const { sceneId, date, hour } = this.state;
    if (!sceneId) return;
    const seq = ++this.shadeSeq;
    try {
      const sidecar = await this.api.getShadeSidecar(sceneId, date, hour);
      if (seq !== this.shadeSeq) return; // superseded by a newer request
      this.callbacks.onShade?.({
        pngUrl: this.api.shadeUrl(sceneId, date, hour),
        bounds: sidecar.bounds,
        sunElevationDeg: sidecar.sun.elevation_deg,
      });
    } catch (err) {
      if (seq === this.shadeSeq) this.callbacks.onError?.(err);
    }
  }

  private async fetchRoute(): Promise<void> {
    const { sceneId, date, hour, from, to, w } = this.state;
    if (!sceneId || !from || !to) return;
    const seq = ++this.routeSeq;
    try {
      const routes = await this.api.route(sceneId, from, to, w, date, hour);
      if (seq !== this.routeSeq) return;
      this.callbacks.onRoutes?.(routes);
    } catch (err) {
      if (seq === this.routeSeq) this.callbacks.onError?.(err);
    }
  }
}

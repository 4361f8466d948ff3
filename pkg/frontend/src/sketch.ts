// Stroke capture model mirroring the server's sketch interchange format.
// Geometry invariants (coords in [0,1], >= 2 points, width > 0) hold by
// construction: coordinates are clamped and short strokes are discarded.

export type Point = [number, number];
export type Rgb = [number, number, number];

export interface Stroke {
  points: Point[];
  width: number;
  color: Rgb;
}

export interface SketchDocument {
  version: 1;
  width_px: number;
  height_px: number;
  strokes: Stroke[];
}

const clamp01 = (v: number) => Math.min(1, Math.max(0, v));

export class SketchModel {
  readonly widthPx: number;
  readonly heightPx: number;
  private strokes: Stroke[] = [];
  private active: Stroke | null = null;

  constructor(widthPx = 1024, heightPx = 1024) {
    if (widthPx < 64 || heightPx < 64) {
      throw new Error(`canvas must be at least 64x64, got ${widthPx}x${heightPx}`);
    }
    this.widthPx = widthPx;
    this.heightPx = heightPx;
  }

  get strokeCount(): number {
    return this.strokes.length;
  }

  get isEmpty(): boolean {
    return this.strokes.length === 0 && this.active === null;
  }

  /** All finished strokes plus the one being drawn, for live repaint. */
  visibleStrokes(): readonly Stroke[] {
    return this.active ? [...this.strokes, this.active] : this.strokes;
  }

  beginStroke(x: number, y: number, width: number, color: Rgb): void {
    if (!(width > 0)) throw new Error(`brush width must be > 0, got ${width}`);
    this.active = { points: [[clamp01(x), clamp01(y)]], width, color };
  }

  extendStroke(x: number, y: number): void {
    this.active?.points.push([clamp01(x), clamp01(y)]);
  }

  /** Commit the active stroke; drops degenerate single-point strokes. */
  endStroke(): void {
    if (this.active && this.active.points.length >= 2) {
      this.strokes.push(this.active);
    }
    this.active = null;
  }

  undo(): void {
    this.strokes.pop();
  }

  clear(): void {
    this.strokes = [];
    this.active = null;
  }

  toDocument(): SketchDocument {
    return {
      version: 1,
      width_px: this.widthPx,
      height_px: this.heightPx,
      strokes: this.strokes.map((s) => ({
        points: s.points.map(([x, y]) => [x, y] as Point),
        width: s.width,
        color: [...s.color] as Rgb,
      })),
    };
  }

  serialize(): string {
    return JSON.stringify(this.toDocument());
  }
}

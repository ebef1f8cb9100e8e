// Live paint trail on the performance canvas. Uses the same eight-hue
// palette as the server-rendered traces so the live view and the stored
// image agree.

import { TouchSample } from "./model.js";

export const PALETTE = [
  "rgb(31,119,180)",
  "rgb(255,127,14)",
  "rgb(44,160,44)",
  "rgb(214,39,40)",
  "rgb(148,103,189)",
  "rgb(140,86,75)",
  "rgb(227,119,194)",
  "rgb(23,190,207)",
];

export class Trail {
  private gestureIndex = -1;
  private last: { x: number; y: number } | null = null;

  constructor(
    private readonly ctx: CanvasRenderingContext2D,
    private readonly size: number,
  ) {}

  private get strokeWidth(): number {
    return Math.max(1, Math.round(this.size / 60));
  }

  clear(): void {
    this.gestureIndex = -1;
    this.last = null;
    this.ctx.fillStyle = "#ffffff";
    this.ctx.fillRect(0, 0, this.size, this.size);
  }

  /** Draw one captured event as it happens. */
  add(event: TouchSample): void {
    if (event.moving === 0) {
      this.gestureIndex += 1;
      this.last = null;
    }
    const px = event.x * (this.size - 1);
    const py = event.y * (this.size - 1);
    const color = PALETTE[Math.max(this.gestureIndex, 0) % PALETTE.length];
    this.ctx.strokeStyle = color;
    this.ctx.fillStyle = color;
    this.ctx.lineWidth = this.strokeWidth;
    this.ctx.lineCap = "round";
    this.ctx.lineJoin = "round";
    if (this.last) {
      this.ctx.beginPath();
      this.ctx.moveTo(this.last.x, this.last.y);
      this.ctx.lineTo(px, py);
      this.ctx.stroke();
    } else {
      this.ctx.beginPath();
      this.ctx.arc(px, py, this.strokeWidth / 2, 0, Math.PI * 2);
      this.ctx.fill();
    }
    this.last = { x: px, y: py };
  }

  /** Redraw a whole event list (playback and reply overlays). */
  drawAll(events: readonly TouchSample[]): void {
    this.clear();
    for (const event of events) {
      this.add(event);
    }
  }
}

// DOM wiring: square jam canvas, instrument picker, record/play/loop,
// world feed with reply. State lives in JamSession; everything the
// server needs goes through JamClient.

import { JamClient, PerformanceDetail } from "./api.js";
import { INSTRUMENTS, Instrument, MAX_DURATION_S } from "./model.js";
import { JamSession, PointerSample } from "./session.js";
import { PreviewSynth } from "./synth.js";
import { Trail } from "./trail.js";

const CANVAS_SIZE = 300;

export class JamApp {
  private session = new JamSession();
  private synth = new PreviewSynth();
  private trail!: Trail;
  private parent: PerformanceDetail | null = null;
  private parentAudio: HTMLAudioElement | null = null;
  private playbackAudio: HTMLAudioElement | null = null;
  private stopTimer: number | null = null;
  private anchor: { x: number; y: number } | null = null;

  private canvas!: HTMLCanvasElement;
  private parentImage!: HTMLImageElement;
  private status!: HTMLElement;
  private feedList!: HTMLElement;
  private picker!: HTMLSelectElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: JamClient,
    private readonly performer = "web",
  ) {}

  mount(): void {
    this.root.innerHTML = `
      <h1>tinyjam</h1>
      <div class="jam">
        <div class="stage">
          <img class="parent-trace" width="${CANVAS_SIZE}" height="${CANVAS_SIZE}" alt="" />
          <canvas width="${CANVAS_SIZE}" height="${CANVAS_SIZE}"></canvas>
        </div>
        <div class="controls">
          <select class="instrument"></select>
          <button class="share">share</button>
          <button class="replay" disabled>play</button>
          <label><input type="checkbox" class="loop" /> loop</label>
          <button class="clear">clear</button>
          <span class="status">touch the square to record (5s max)</span>
        </div>
      </div>
      <h2>world</h2>
      <ul class="feed"></ul>
    `;
    this.canvas = this.root.querySelector("canvas")!;
    this.parentImage = this.root.querySelector(".parent-trace")!;
    this.status = this.root.querySelector(".status")!;
    this.feedList = this.root.querySelector(".feed")!;
    this.picker = this.root.querySelector(".instrument")!;
    for (const name of INSTRUMENTS) {
      const option = document.createElement("option");
      option.value = option.textContent = name;
      this.picker.append(option);
    }
    this.picker.addEventListener("change", () => {
      this.session.instrument = this.picker.value as Instrument;
    });
    this.trail = new Trail(this.canvas.getContext("2d")!, CANVAS_SIZE);
    this.trail.clear();

    this.canvas.addEventListener("pointerdown", (e) => this.onPointer("down", e));
    this.canvas.addEventListener("pointermove", (e) => this.onPointer("move", e));
    this.canvas.addEventListener("pointerup", (e) => this.onPointer("up", e));
    this.canvas.addEventListener("pointercancel", (e) => this.onPointer("up", e));

    this.root.querySelector(".share")!.addEventListener("click", () => void this.share());
    this.root.querySelector(".clear")!.addEventListener("click", () => this.clear());
    this.root
      .querySelector(".replay")!
      .addEventListener("click", () => this.togglePlayback());

    void this.refreshFeed();
  }

  private toPointerSample(kind: PointerSample["kind"], e: PointerEvent): PointerSample {
    const rect = this.canvas.getBoundingClientRect();
    return {
      kind,
      pointerId: e.pointerId,
      x: (e.clientX - rect.left) / rect.width,
      y: (e.clientY - rect.top) / rect.height,
      pressure: e.pointerType === "mouse" ? 1.0 : e.pressure || 1.0,
      timeMs: e.timeStamp,
    };
  }

  private onPointer(kind: PointerSample["kind"], e: PointerEvent): void {
    if (kind === "down") {
      this.canvas.setPointerCapture(e.pointerId);
    }
    const wasIdle = this.session.state === "idle";
    const event = this.session.process(this.toPointerSample(kind, e));
    if (kind === "up") {
      this.synth.noteOff();
      return;
    }
    if (!event) {
      if (this.session.state === "done") {
        this.stopRecording();
      }
      return;
    }
    e.preventDefault();
    this.trail.add(event);
    if (event.moving === 0) {
      this.anchor = { x: event.x, y: event.y };
      this.synth.noteOn(this.session.instrument, event.x, event.y);
    } else if (this.anchor) {
      this.synth.move(event.x - this.anchor.x, event.y - this.anchor.y, event.y);
    }
    if (wasIdle) {
      this.status.textContent = "recording…";
      if (this.parent && this.parentAudio) {
        void this.parentAudio.play().catch(() => undefined);
      }
      this.stopTimer = window.setTimeout(() => {
        this.session.finish();
        this.stopRecording();
      }, MAX_DURATION_S * 1000);
    }
  }

  private stopRecording(): void {
    if (this.stopTimer !== null) {
      clearTimeout(this.stopTimer);
      this.stopTimer = null;
    }
    this.synth.noteOff();
    this.parentAudio?.pause();
    this.status.textContent = `done (${this.session.elapsedS.toFixed(2)}s) — share it?`;
    (this.root.querySelector(".replay") as HTMLButtonElement).disabled = true;
  }

  private clear(): void {
    this.session.reset();
    this.session.instrument = this.picker.value as Instrument;
    this.trail.clear();
    this.setParent(null);
    this.status.textContent = "touch the square to record (5s max)";
  }

  private async share(): Promise<void> {
    this.session.finish();
    this.stopRecording();
    if (this.session.events.length === 0) {
      this.status.textContent = "nothing recorded yet";
      return;
    }
    const problems = this.session.validate();
    if (problems.length > 0) {
      this.status.textContent = `not valid: ${problems[0]}`;
      return;
    }
    try {
      const id = await this.client.submit({
        instrument: this.session.instrument,
        performer: this.performer,
        events: this.session.events,
        parentId: this.session.parentId,
      });
      this.status.textContent = `shared as ${id.slice(0, 8)}…`;
      this.enablePlayback(id);
      this.session.reset();
      this.session.instrument = this.picker.value as Instrument;
      await this.refreshFeed();
    } catch (err) {
      this.status.textContent = `share failed: ${(err as Error).message}`;
    }
  }

  private enablePlayback(id: string): void {
    const button = this.root.querySelector(".replay") as HTMLButtonElement;
    button.disabled = false;
    this.playbackAudio = new Audio(this.client.audioUrl(id));
    const loop = this.root.querySelector(".loop") as HTMLInputElement;
    this.playbackAudio.loop = loop.checked;
    loop.addEventListener("change", () => {
      if (this.playbackAudio) {
        this.playbackAudio.loop = loop.checked;
      }
    });
  }

  private togglePlayback(): void {
    if (!this.playbackAudio) {
      return;
    }
    if (this.playbackAudio.paused) {
      void this.playbackAudio.play().catch(() => undefined);
    } else {
      this.playbackAudio.pause();
      this.playbackAudio.currentTime = 0;
    }
  }

  private setParent(parent: PerformanceDetail | null): void {
    this.parent = parent;
    this.session.parentId = parent ? parent.id : null;
    if (parent) {
      this.parentImage.src = this.client.traceUrl(parent.id);
      this.parentImage.style.opacity = "0.45";
      this.parentAudio = new Audio(this.client.audioUrl(parent.id));
      this.status.textContent = `replying to ${parent.performer || parent.id.slice(0, 8)} — touch to record`;
    } else {
      this.parentImage.removeAttribute("src");
      this.parentAudio = null;
    }
  }

  private async refreshFeed(): Promise<void> {
    const page = await this.client.feed(1, 20);
    this.feedList.innerHTML = "";
    for (const item of page.items) {
      const li = document.createElement("li");
      const img = document.createElement("img");
      img.src = this.client.traceUrl(item.id);
      img.width = img.height = 80;
      const label = document.createElement("span");
      label.textContent = ` ${item.performer || "anon"} · ${item.instrument}` +
        (item.parent_id ? " · reply" : "");
      const play = document.createElement("button");
      play.textContent = "play";
      let audio: HTMLAudioElement | null = null;
      play.addEventListener("click", () => {
        audio = audio ?? new Audio(this.client.audioUrl(item.id));
        void audio.play().catch(() => undefined);
      });
      const reply = document.createElement("button");
      reply.textContent = "reply";
      reply.addEventListener("click", () => {
        void this.client.get(item.id).then((detail) => {
          this.session.reset();
          this.session.instrument = this.picker.value as Instrument;
          this.trail.clear();
          this.setParent(detail);
          window.scrollTo({ top: 0 });
        });
      });
      li.append(img, label, play, reply);
      this.feedList.append(li);
    }
  }
}

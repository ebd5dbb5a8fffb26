import type { FrameMsg } from "./protocol.js";

/** Last-frame-wins handoff between the socket callback and the render loop.
 * The renderer always draws the newest frame; anything it never got around
 * to is dropped, so a slow tab cannot grow a queue. */
export class FrameBuffer {
  private latest: FrameMsg | null = null;
  dropped = 0;

  push(frame: FrameMsg): void {
    if (this.latest !== null) this.dropped += 1;
    this.latest = frame;
  }

  /** Remove and return the newest frame, or null when nothing arrived. */
  take(): FrameMsg | null {
    const frame = this.latest;
    this.latest = null;
    return frame;
  }
}

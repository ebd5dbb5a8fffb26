/** Browser entry point. Wires the gateway client, input devices, and canvas
 * together; everything it renders about the world comes from gateway frames. */

import { parseConfig, type CockpitConfig } from "./config.js";
import { FrameBuffer } from "./frames.js";
import {
  InputPump,
  KeyboardSource,
  PointerDragSource,
  PointerLockHead,
  gamepadSnapshot,
  inputGauges,
  pedalFromAxis,
  wheelSnapshot,
  type InputSnapshot,
} from "./inputs.js";
import { GatewayClient, type SocketLike } from "./net.js";
import { ITEM_SETS, ITEM_TAGS, submission, type SetName } from "./pq.js";
import type { FrameMsg, GatewayMsg, ResultMsg, SceneMsg } from "./protocol.js";
import { cameraFor, drawScene, findEgo, formatSpeed } from "./render.js";

const ZOOM_PX_PER_M = 6;
const WARNING_FLASH_MS = 1500;

function browserSocket(url: string): SocketLike {
  const ws = new WebSocket(url);
  const like: SocketLike = {
    send: (data) => ws.send(data),
    close: () => ws.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
  };
  ws.onopen = () => like.onopen?.();
  ws.onmessage = (ev) => like.onmessage?.(String(ev.data));
  ws.onclose = () => like.onclose?.();
  ws.onerror = () => ws.close();
  return like;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function boot(): void {
  const status = el<HTMLDivElement>("status");
  let cfg: CockpitConfig;
  try {
    cfg = parseConfig(location.search, location.hostname);
  } catch (err) {
    status.textContent = `config error: ${(err as Error).message}`;
    return;
  }

  const canvas = el<HTMLCanvasElement>("view");
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    status.textContent = "canvas 2d context unavailable";
    return;
  }
  const banner = el<HTMLDivElement>("banner");
  const deviceBanner = el<HTMLDivElement>("device-banner");
  const reclaim = el<HTMLButtonElement>("reclaim");
  const hud = el<HTMLDivElement>("hud");
  const hudSpeed = el<HTMLSpanElement>("hud-speed");
  const hudPhase = el<HTMLSpanElement>("hud-phase");
  const hudLink = el<HTMLSpanElement>("hud-link");
  const gauges = el<HTMLDivElement>("gauges");
  const steerNeedle = el<HTMLDivElement>("steer-needle");
  const throttleBar = el<HTMLDivElement>("bar-throttle");
  const brakeBar = el<HTMLDivElement>("bar-brake");
  const resultCard = el<HTMLDivElement>("result");
  const pqCard = el<HTMLDivElement>("pq");

  const frames = new FrameBuffer();
  let scene: SceneMsg | null = null;
  let lastFrame: FrameMsg | null = null;
  let result: ResultMsg | null = null;
  let warningUntil = 0;
  let warningText = "";
  let pump: InputPump | null = null;

  const keyboard = new KeyboardSource();
  const drag = new PointerDragSource(Math.max(1, canvas.clientWidth / 2 || 200));
  const head = new PointerLockHead();

  function setStatus(text: string): void {
    status.textContent = `${text} | gateway ${cfg.gateway} | ${cfg.modality}/${cfg.view}`;
  }

  // --- gateway client -----------------------------------------------------

  function onMessage(msg: GatewayMsg): void {
    switch (msg.type) {
      case "scene":
        scene = msg;
        break;
      case "frame":
        frames.push(msg);
        break;
      case "warning":
        if (msg.active) {
          warningText = `collision warning: ${msg.source_id}`;
          warningUntil = performance.now() + WARNING_FLASH_MS;
        }
        break;
      case "result":
        result = msg;
        showResult(msg);
        showPqForm();
        break;
      case "ack":
        renderPqAck(msg.accepted, msg.errors ?? [], msg.scores, msg.overall);
        break;
    }
  }

  const client = new GatewayClient(
    cfg.gateway,
    { role: cfg.role, modality: cfg.modality, view: cfg.view },
    {
      onEstablished: (sessionId, role) => {
        setStatus(`connected as ${role}`);
        pump =
          role === "driver" ? new InputPump(cfg.modality, sessionId, (m) => client.send(m)) : null;
        gauges.style.display = role === "driver" ? "flex" : "none";
        reclaim.style.display =
          cfg.role === "driver" && role !== "driver" ? "inline-block" : "none";
      },
      onRejected: (reason) => {
        setStatus(`rejected: ${reason}`);
        gauges.style.display = "none";
      },
      onMessage,
      onDisconnect: (delayMs) => {
        pump = null;
        gauges.style.display = "none";
        setStatus(delayMs === null ? "disconnected" : `disconnected, retrying in ${delayMs} ms`);
      },
      onMalformed: (count) => {
        setStatus(`connected (skipped ${count} malformed)`);
      },
    },
    browserSocket,
  );

  reclaim.addEventListener("click", () => {
    client.confirmReclaim();
    client.reconnectNow();
    reclaim.style.display = "none";
    setStatus("reclaiming driver seat");
  });

  // --- input devices ------------------------------------------------------

  window.addEventListener("keydown", (ev) => {
    if (keyboard.keydown(ev.code)) ev.preventDefault();
  });
  window.addEventListener("keyup", (ev) => {
    if (keyboard.keyup(ev.code)) ev.preventDefault();
  });
  window.addEventListener("blur", () => keyboard.releaseAll());

  canvas.addEventListener("pointerdown", (ev) => {
    if (cfg.modality === "mouse") {
      canvas.setPointerCapture(ev.pointerId);
      drag.press(ev.clientX, ev.clientY);
    } else if (cfg.view === "hmd_dynamic") {
      canvas.requestPointerLock();
    }
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (cfg.modality === "mouse") drag.move(ev.clientX, ev.clientY);
    if (cfg.view === "hmd_dynamic" && document.pointerLockElement === canvas) {
      head.addMovement(ev.movementX, ev.movementY);
    }
  });
  canvas.addEventListener("pointerup", () => drag.release());
  canvas.addEventListener("pointercancel", () => drag.release());

  window.addEventListener("gamepadconnected", () => {
    deviceBanner.style.display = "none";
  });
  window.addEventListener("gamepaddisconnected", () => {
    pump?.deviceLost();
    deviceBanner.textContent = `${cfg.modality} disconnected, controls neutral`;
    deviceBanner.style.display = "block";
  });

  function firstGamepad(): Gamepad | null {
    for (const pad of navigator.getGamepads()) {
      if (pad !== null && pad.connected) return pad;
    }
    return null;
  }

  function currentSnapshot(): InputSnapshot | null {
    switch (cfg.modality) {
      case "keyboard":
        return keyboard.snapshot();
      case "mouse":
        return drag.snapshot();
      case "gamepad": {
        const pad = firstGamepad();
        if (pad === null) return null;
        return gamepadSnapshot(
          pad.axes[0] ?? 0,
          pad.buttons[7]?.value ?? 0,
          pad.buttons[6]?.value ?? 0,
        );
      }
      case "wheel": {
        const pad = firstGamepad();
        if (pad === null) return null;
        return wheelSnapshot(
          pad.axes[0] ?? 0,
          pedalFromAxis(pad.axes[1] ?? 1),
          pedalFromAxis(pad.axes[2] ?? 1),
        );
      }
    }
  }

  // --- post-run cards -----------------------------------------------------

  function showResult(res: ResultMsg): void {
    const rows = Object.entries(res.report)
      .map(([key, value]) => {
        const shown =
          typeof value === "number" && !Number.isInteger(value) ? value.toFixed(3) : String(value);
        return `<tr><td>${key}</td><td>${shown}</td></tr>`;
      })
      .join("");
    resultCard.innerHTML = `<h2>run report</h2><table>${rows}</table>`;
    resultCard.style.display = "block";
  }

  function pqSet(): SetName {
    return pump !== null || cfg.role === "driver" ? "interaction" : "observation";
  }

  function showPqForm(): void {
    const set = pqSet();
    const rows = ITEM_SETS[set]
      .map((id) => {
        const cells = [1, 2, 3, 4, 5, 6, 7]
          .map(
            (k) =>
              `<label><input type="radio" name="item-${id}" value="${k}"><span>${k}</span></label>`,
          )
          .join("");
        return `<tr><td>${id}. ${ITEM_TAGS[id] ?? ""}</td><td class="scale">${cells}</td></tr>`;
      })
      .join("");
    pqCard.innerHTML =
      `<h2>presence questionnaire (${set})</h2>` +
      `<p>rate each item from 1 (not at all) to 7 (completely)</p>` +
      `<table>${rows}</table><button id="pq-send">submit</button><div id="pq-status"></div>`;
    pqCard.style.display = "block";
    el<HTMLButtonElement>("pq-send").addEventListener("click", () => {
      const ratings: Record<number, number> = {};
      for (const id of ITEM_SETS[set]) {
        const picked = pqCard.querySelector<HTMLInputElement>(`input[name="item-${id}"]:checked`);
        if (picked !== null) ratings[id] = Number(picked.value);
      }
      try {
        client.send(submission(set, cfg.participant, cfg.configuration, ratings));
        el<HTMLDivElement>("pq-status").textContent = "submitted, waiting for scores";
      } catch (err) {
        el<HTMLDivElement>("pq-status").textContent = (err as Error).message;
      }
    });
  }

  function renderPqAck(
    accepted: boolean,
    errors: string[],
    scores?: Record<string, number>,
    overall?: number,
  ): void {
    const target = document.getElementById("pq-status");
    if (target === null) return;
    if (!accepted) {
      target.textContent = `rejected: ${errors.join("; ")}`;
      return;
    }
    const parts = Object.entries(scores ?? {}).map(([k, v]) => `${k}=${v}`);
    target.textContent = `scored: ${parts.join(" ")} overall=${overall}`;
  }

  // --- render loop ----------------------------------------------------------

  function resize(): void {
    canvas.width = canvas.clientWidth;
    canvas.height = canvas.clientHeight;
  }
  window.addEventListener("resize", resize);
  resize();

  function draw(now: number): void {
    const fresh = frames.take();
    if (fresh !== null) lastFrame = fresh;
    const frame = lastFrame;
    const ego = frame === null ? null : findEgo(frame);
    const cam = cameraFor(
      cfg.view,
      ego === null ? null : { x: ego.pose.x, y: ego.pose.y, heading: ego.pose.heading },
      head.pose().yaw,
      ZOOM_PX_PER_M,
      [120, 0],
    );
    drawScene(ctx!, scene, frame, cam, canvas.width, canvas.height);
    if (cfg.view === "triple") {
      ctx!.strokeStyle = "#000";
      ctx!.lineWidth = 2;
      for (const fx of [canvas.width / 3, (2 * canvas.width) / 3]) {
        ctx!.beginPath();
        ctx!.moveTo(fx, 0);
        ctx!.lineTo(fx, canvas.height);
        ctx!.stroke();
      }
    }

    const active = (frame !== null && frame.warnings.length > 0) || now < warningUntil;
    if (active) {
      if (frame !== null && frame.warnings.length > 0) {
        warningText = `collision warning: ${frame.warnings.join(", ")}`;
      }
      banner.textContent = warningText;
    }
    banner.style.display = active ? "block" : "none";

    if (ego !== null) {
      hudSpeed.textContent = formatSpeed(ego.speed);
      hudPhase.textContent = result !== null ? "complete" : frame!.phase;
      hudLink.textContent =
        frame!.ack_seq !== undefined && pump !== null
          ? `ack ${frame!.ack_seq}/${pump.lastSeq}`
          : `tick ${frame!.tick}`;
      hud.style.display = "block";
    }
    requestAnimationFrame(loop);
  }

  function loop(tMs: number): void {
    if (pump !== null) {
      const snapshot = currentSnapshot();
      pump.tick(
        snapshot,
        tMs,
        cfg.view === "hmd_dynamic" || cfg.view === "hmd_static" ? head.pose() : undefined,
      );
      const shown = snapshot ?? { axes: {}, buttons: {} };
      const g = inputGauges(shown, cfg.modality);
      steerNeedle.style.left = `${50 - g.steer * 50}%`;
      throttleBar.style.width = `${g.throttle * 100}%`;
      brakeBar.style.width = `${g.brake * 100}%`;
    }
    draw(tMs);
  }

  setStatus("connecting");
  client.connect();
  requestAnimationFrame(loop);
}

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", boot);
} else {
  boot();
}

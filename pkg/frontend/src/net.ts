/** Gateway session client: hello handshake, reconnect with exponential
 * backoff, and the rule that a dropped driver slot is never re-claimed
 * without an explicit user action, because someone else may legitimately
 * hold it by the time the network comes back. */

import type { Modality, Role, View } from "./config.js";
import { parseMessage, type AckMsg, type GatewayMsg } from "./protocol.js";

export const BACKOFF_BASE_MS = 500;
export const BACKOFF_CAP_MS = 8000;

export function backoffDelayMs(attempt: number): number {
  return Math.min(BACKOFF_CAP_MS, BACKOFF_BASE_MS * 2 ** Math.max(0, attempt));
}

/** Role for the next connection attempt. A driver who never held the slot may
 * keep asking for it; one whose established session dropped must not take it
 * back silently. */
export function reconnectRole(
  configured: Role,
  heldDriverSlot: boolean,
  reclaimConfirmed: boolean,
): Role {
  if (configured !== "driver") return configured;
  if (!heldDriverSlot) return "driver";
  return reclaimConfirmed ? "driver" : "spectator";
}

/** The subset of WebSocket the client uses; injectable for tests. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((data: string) => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface HelloParams {
  role: Role;
  modality: Modality;
  view: View;
  stream_rate?: number;
}

export interface ClientHandlers {
  /** Session accepted; role is what the gateway granted this attempt. */
  onEstablished?(sessionId: string, role: Role): void;
  /** Hello rejected (e.g. "driver slot occupied"); the client stays down. */
  onRejected?(reason: string): void;
  /** Any post-handshake message: scene, frame, warning, result, pq ack. */
  onMessage?(msg: GatewayMsg): void;
  /** Connection lost; delayMs is the scheduled retry, null when halted. */
  onDisconnect?(delayMs: number | null): void;
  onMalformed?(count: number): void;
}

export class GatewayClient {
  malformedCount = 0;
  sessionId: string | null = null;
  grantedRole: Role | null = null;

  private sock: SocketLike | null = null;
  private attempt = 0;
  private heldDriverSlot = false;
  private reclaimConfirmed = false;
  private halted = false;
  private helloAcked = false;

  constructor(
    private url: string,
    private hello: HelloParams,
    private handlers: ClientHandlers,
    private factory: SocketFactory,
    private schedule: (fn: () => void, ms: number) => void = (fn, ms) => {
      setTimeout(fn, ms);
    },
  ) {}

  /** Role the next connect() will ask for. */
  get nextRole(): Role {
    return reconnectRole(this.hello.role, this.heldDriverSlot, this.reclaimConfirmed);
  }

  connect(): void {
    if (this.halted) return;
    const role = this.nextRole;
    this.reclaimConfirmed = false;
    this.helloAcked = false;
    const sock = this.factory(this.url);
    this.sock = sock;
    sock.onopen = () => {
      sock.send(
        JSON.stringify({
          type: "hello",
          role,
          modality: this.hello.modality,
          view: this.hello.view,
          stream_rate: this.hello.stream_rate ?? 30.0,
        }),
      );
    };
    sock.onmessage = (data) => this.dispatch(data, role);
    sock.onclose = () => this.dropped();
  }

  /** Arm the next connect() to ask for the driver slot again. */
  confirmReclaim(): void {
    this.reclaimConfirmed = true;
  }

  /** Drop the live socket so the normal retry path reconnects; used after
   * confirmReclaim(). With no live socket a scheduled retry already exists
   * and will pick the confirmation up. */
  reconnectNow(): void {
    if (!this.halted && this.sock !== null) this.sock.close();
  }

  send(msg: object): void {
    this.sock?.send(JSON.stringify(msg));
  }

  close(): void {
    this.halted = true;
    try {
      this.sock?.send(JSON.stringify({ type: "bye" }));
    } catch {
      // closing anyway
    }
    this.sock?.close();
  }

  private dispatch(raw: string, askedRole: Role): void {
    const msg = parseMessage(raw);
    if (msg === null) {
      this.malformedCount += 1;
      this.handlers.onMalformed?.(this.malformedCount);
      return;
    }
    if (!this.helloAcked && msg.type === "ack") {
      this.helloAcked = true;
      this.handleHelloAck(msg, askedRole);
      return;
    }
    this.handlers.onMessage?.(msg);
  }

  private handleHelloAck(ack: AckMsg, askedRole: Role): void {
    if (!ack.accepted) {
      // a rejected hello is not transient; stop rather than hammer the slot
      this.halted = true;
      this.handlers.onRejected?.(ack.reason ?? "rejected");
      return;
    }
    this.attempt = 0;
    this.sessionId = ack.session_id ?? null;
    this.grantedRole = (ack.role as Role | undefined) ?? askedRole;
    if (this.grantedRole === "driver") this.heldDriverSlot = true;
    this.handlers.onEstablished?.(this.sessionId ?? "", this.grantedRole);
  }

  private dropped(): void {
    this.sock = null;
    this.sessionId = null;
    this.grantedRole = null;
    if (this.halted) {
      this.handlers.onDisconnect?.(null);
      return;
    }
    const delay = backoffDelayMs(this.attempt);
    this.attempt += 1;
    this.handlers.onDisconnect?.(delay);
    this.schedule(() => this.connect(), delay);
  }
}

/** Cockpit configuration from URL query parameters, e.g.
 * `cockpit.html?role=driver&modality=gamepad&view=hmd_dynamic`. */

export const ROLES = ["driver", "spectator"] as const;
export const MODALITIES = ["keyboard", "mouse", "gamepad", "wheel"] as const;
export const VIEWS = ["single", "triple", "hmd_static", "hmd_dynamic"] as const;

export type Role = (typeof ROLES)[number];
export type Modality = (typeof MODALITIES)[number];
export type View = (typeof VIEWS)[number];

export const DEFAULT_GATEWAY_PORT = 8765;

export interface CockpitConfig {
  gateway: string;
  role: Role;
  modality: Modality;
  view: View;
  /** participant id used when submitting the post-run questionnaire */
  participant: string;
  /** configuration label for the questionnaire, defaults to modality+view */
  configuration: string;
}

function pick<T extends readonly string[]>(
  params: URLSearchParams,
  name: string,
  allowed: T,
  fallback: T[number],
): T[number] {
  const value = params.get(name) ?? fallback;
  if (!allowed.includes(value)) {
    throw new Error(`${name} must be one of ${allowed.join(", ")}, got ${value}`);
  }
  return value;
}

export function parseConfig(search: string, hostname = "127.0.0.1"): CockpitConfig {
  const params = new URLSearchParams(search);
  const role = pick(params, "role", ROLES, "spectator");
  const modality = pick(params, "modality", MODALITIES, "keyboard");
  const view = pick(params, "view", VIEWS, "single");
  return {
    gateway:
      params.get("gateway") ?? `ws://${hostname || "127.0.0.1"}:${DEFAULT_GATEWAY_PORT}`,
    role,
    modality,
    view,
    participant: params.get("participant") ?? "anonymous",
    configuration: params.get("configuration") ?? `${modality}+${view}`,
  };
}

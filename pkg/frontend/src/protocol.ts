// Wire schema for the live gateway (one JSON document per WebSocket text frame).
// Mirrors docs/protocol.md; the gateway validates inbound messages against the
// same shapes.

export type FeedbackKind = "busy_2_min" | "busy_4_min";

export const FEEDBACK_KINDS: FeedbackKind[] = ["busy_2_min", "busy_4_min"];

export const BUSY_SECONDS: Record<FeedbackKind, number> = {
  busy_2_min: 120,
  busy_4_min: 240,
};

export interface PosePayload {
  x: number;
  y: number;
  heading: number;
}

export interface RobotPayload {
  id: number;
  pose: PosePayload;
  trajectory: [number, number][];
  action: string;
  status: string;
}

export interface ConstraintPayload {
  start: number;
  end: number;
}

export interface FramePayload {
  tick: number;
  robots: RobotPayload[];
  doors: { id: string; state: "open" | "closed" }[];
  constraints: ConstraintPayload[];
}

export interface MapPayload {
  nodes: { id: string; x: number; y: number }[];
  edges: { from: string; to: string; door?: string }[];
  doors: { id: string; assisted: boolean }[];
  stations: { id: string; node: string; kind: "loading" | "base" }[];
}

export interface HelloPayload {
  protocol: string;
  scenario: string;
  n_robots: number;
  dt: number;
  feedback_enabled: boolean;
  feedback_kinds: string[];
  map: MapPayload;
}

export type ServerMessage =
  | { type: "hello"; seq: number; payload: HelloPayload }
  | { type: "frame"; seq: number; payload: FramePayload }
  | { type: "ack"; seq: number; payload: { accepted: boolean; kind: string; at_tick: number } }
  | { type: "error"; seq: number; payload: { message: string } };

export type ClientMessage =
  | { type: "feedback"; kind: FeedbackKind }
  | { type: "door_command"; door: string };

export function feedbackMessage(kind: FeedbackKind): ClientMessage {
  return { type: "feedback", kind };
}

export function doorCommand(door: string): ClientMessage {
  return { type: "door_command", door };
}

export function validateOutbound(message: ClientMessage): string | null {
  if (message.type === "feedback") {
    if (!FEEDBACK_KINDS.includes(message.kind)) {
      return `feedback kind '${message.kind}' is not in the library`;
    }
    return null;
  }
  if (message.type === "door_command") {
    if (typeof message.door !== "string" || message.door.length === 0) {
      return "door_command requires a door id";
    }
    return null;
  }
  return `unknown outbound type '${(message as { type: string }).type}'`;
}

export function parseServerMessage(data: string): ServerMessage | null {
  let parsed: unknown;
  try {
    parsed = JSON.parse(data);
  } catch {
    return null;
  }
  if (typeof parsed !== "object" || parsed === null) return null;
  const message = parsed as { type?: string; seq?: number; payload?: unknown };
  if (typeof message.type !== "string" || typeof message.seq !== "number") return null;
  if (!["hello", "frame", "ack", "error"].includes(message.type)) return null;
  if (typeof message.payload !== "object" || message.payload === null) return null;
  return message as ServerMessage;
}

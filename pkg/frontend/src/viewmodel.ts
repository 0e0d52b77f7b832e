// Pure view state derived from the latest hello/frame: rendering and the DOM
// layer consume it, tests drive it directly. Reconnecting rebuilds the whole
// model from the fresh hello, so nothing here is authoritative simulation
// state.

import {
  ClientMessage,
  ConstraintPayload,
  FeedbackKind,
  FramePayload,
  HelloPayload,
  ServerMessage,
  doorCommand,
  feedbackMessage,
  validateOutbound,
} from "./protocol.js";

export type Connection = "connecting" | "open" | "closed";

export interface LogEntry {
  tick: number;
  text: string;
}

export interface ViewModel {
  connection: Connection;
  hello: HelloPayload | null;
  frame: FramePayload | null;
  lastFrameSeq: number;
  // feedback button lock until a frame echoes the new constraint
  pendingFeedback: FeedbackKind | null;
  constraintsWhenSent: ConstraintPayload[];
  banner: string | null;
  log: LogEntry[];
}

export function initialViewModel(): ViewModel {
  return {
    connection: "connecting",
    hello: null,
    frame: null,
    lastFrameSeq: -1,
    pendingFeedback: null,
    constraintsWhenSent: [],
    banner: null,
    log: [],
  };
}

const LOG_LIMIT = 40;

function log(vm: ViewModel, text: string): ViewModel {
  const tick = vm.frame ? vm.frame.tick : 0;
  const entries = [...vm.log, { tick, text }].slice(-LOG_LIMIT);
  return { ...vm, log: entries };
}

export function onOpen(vm: ViewModel): ViewModel {
  return log({ ...vm, connection: "open", banner: null }, "connected");
}

export function onClose(vm: ViewModel): ViewModel {
  // stateless with respect to simulation truth: drop everything derived
  return log(
    { ...initialViewModel(), connection: "closed", log: vm.log },
    "disconnected; retrying",
  );
}

function sameConstraints(a: ConstraintPayload[], b: ConstraintPayload[]): boolean {
  if (a.length !== b.length) return false;
  return a.every((w, i) => w.start === b[i].start && w.end === b[i].end);
}

export function onServerMessage(vm: ViewModel, message: ServerMessage): ViewModel {
  switch (message.type) {
    case "hello":
      return log(
        { ...vm, hello: message.payload, frame: null, lastFrameSeq: -1 },
        `hello: scenario '${message.payload.scenario}', ${message.payload.n_robots} robots`,
      );
    case "frame": {
      if (message.seq <= vm.lastFrameSeq) {
        return vm; // stale or duplicate frame: ignore
      }
      let next: ViewModel = { ...vm, frame: message.payload, lastFrameSeq: message.seq };
      if (
        next.pendingFeedback !== null &&
        !sameConstraints(message.payload.constraints, next.constraintsWhenSent)
      ) {
        next = log(next, `constraint active (${next.pendingFeedback})`);
        next = { ...next, pendingFeedback: null };
      }
      return next;
    }
    case "ack":
      return log(vm, `ack: ${message.payload.kind} at tick ${message.payload.at_tick}`);
    case "error":
      return log({ ...vm, banner: message.payload.message }, `error: ${message.payload.message}`);
  }
}

export interface SendResult {
  vm: ViewModel;
  outbound: ClientMessage | null;
}

export function clickFeedback(vm: ViewModel, kind: FeedbackKind): SendResult {
  if (vm.connection !== "open") {
    return { vm: { ...vm, banner: "not connected" }, outbound: null };
  }
  if (vm.pendingFeedback !== null) {
    return { vm, outbound: null }; // disabled until the echo arrives
  }
  const message = feedbackMessage(kind);
  const problem = validateOutbound(message);
  if (problem !== null) {
    return { vm: { ...vm, banner: problem }, outbound: null };
  }
  const current = vm.frame ? vm.frame.constraints : [];
  return {
    vm: log(
      { ...vm, pendingFeedback: kind, constraintsWhenSent: current },
      `sent ${kind}`,
    ),
    outbound: message,
  };
}

export function clickDoor(vm: ViewModel, door: string): SendResult {
  if (vm.connection !== "open") {
    return { vm: { ...vm, banner: "not connected" }, outbound: null };
  }
  const message = doorCommand(door);
  const problem = validateOutbound(message);
  if (problem !== null) {
    return { vm: { ...vm, banner: problem }, outbound: null };
  }
  return { vm: log(vm, `sent open door ${door}`), outbound: message };
}

export interface BusyCountdown {
  kind: "busy";
  remaining: number;
  end: number;
}

export function busyCountdown(vm: ViewModel): BusyCountdown | null {
  if (!vm.frame || vm.frame.constraints.length === 0) return null;
  const window = vm.frame.constraints[vm.frame.constraints.length - 1];
  const remaining = window.end - vm.frame.tick;
  if (remaining <= 0) return null;
  return { kind: "busy", remaining, end: window.end };
}

export function feedbackButtonsEnabled(vm: ViewModel): boolean {
  return vm.connection === "open" && vm.hello !== null && vm.pendingFeedback === null;
}

export function doorStates(vm: ViewModel): Map<string, "open" | "closed"> {
  const states = new Map<string, "open" | "closed">();
  if (vm.hello) {
    for (const door of vm.hello.map.doors) states.set(door.id, "closed");
  }
  if (vm.frame) {
    for (const door of vm.frame.doors) states.set(door.id, door.state);
  }
  return states;
}

import assert from "node:assert/strict";
import test from "node:test";

import { FramePayload, HelloPayload, ServerMessage } from "../src/protocol.js";
import {
  busyCountdown,
  clickDoor,
  clickFeedback,
  doorStates,
  feedbackButtonsEnabled,
  initialViewModel,
  onClose,
  onOpen,
  onServerMessage,
} from "../src/viewmodel.js";
import { toScreen, worldTransform } from "../src/view.js";

const HELLO: HelloPayload = {
  protocol: "arn-live-1",
  scenario: "office3",
  n_robots: 3,
  dt: 0.5,
  feedback_enabled: true,
  feedback_kinds: ["busy_2_min", "busy_4_min"],
  map: {
    nodes: [
      { id: "B", x: 0, y: 0 },
      { id: "D", x: 2, y: 0 },
      { id: "C1", x: 4, y: 0 },
    ],
    edges: [
      { from: "B", to: "D" },
      { from: "D", to: "C1", door: "D" },
    ],
    doors: [{ id: "D", assisted: true }],
    stations: [{ id: "B", node: "B", kind: "base" }],
  },
};

function frame(tick: number, overrides: Partial<FramePayload> = {}): FramePayload {
  return {
    tick,
    robots: [
      {
        id: 0,
        pose: { x: 1, y: 0, heading: 0 },
        trajectory: [[1, 0], [2, 0]],
        action: "approach(D)",
        status: "moving",
      },
    ],
    doors: [{ id: "D", state: "closed" }],
    constraints: [],
    ...overrides,
  };
}

function message(type: "hello" | "frame", seq: number, payload: unknown): ServerMessage {
  return { type, seq, payload } as ServerMessage;
}

function connected() {
  let vm = onOpen(initialViewModel());
  vm = onServerMessage(vm, message("hello", 1, HELLO));
  return vm;
}

test("hello populates the map and resets frames", () => {
  const vm = connected();
  assert.equal(vm.hello?.scenario, "office3");
  assert.equal(vm.frame, null);
  assert.equal(vm.lastFrameSeq, -1);
});

test("frames apply in sequence and stale frames are ignored", () => {
  let vm = connected();
  vm = onServerMessage(vm, message("frame", 5, frame(2.5)));
  assert.equal(vm.frame?.tick, 2.5);
  vm = onServerMessage(vm, message("frame", 4, frame(99.0)));
  assert.equal(vm.frame?.tick, 2.5, "stale seq must not overwrite");
  vm = onServerMessage(vm, message("frame", 6, frame(3.0)));
  assert.equal(vm.frame?.tick, 3.0);
  assert.equal(vm.frame?.robots.length, 1);
});

test("rendered robot count equals frame robot count", () => {
  let vm = connected();
  const payload = frame(1.0);
  vm = onServerMessage(vm, message("frame", 2, payload));
  assert.equal(vm.frame?.robots.length, payload.robots.length);
});

test("busy click emits the schema and locks the button until the echo", () => {
  let vm = connected();
  vm = onServerMessage(vm, message("frame", 2, frame(1.0)));
  const { vm: after, outbound } = clickFeedback(vm, "busy_2_min");
  assert.deepEqual(outbound, { type: "feedback", kind: "busy_2_min" });
  assert.equal(feedbackButtonsEnabled(after), false);
  // a frame that still shows the old constraints keeps the lock
  let echoed = onServerMessage(after, message("frame", 3, frame(1.5)));
  assert.equal(feedbackButtonsEnabled(echoed), false);
  // the frame reflecting the new window releases it and shows the countdown
  echoed = onServerMessage(
    echoed,
    message("frame", 4, frame(2.0, { constraints: [{ start: 2.0, end: 122.0 }] })),
  );
  assert.equal(feedbackButtonsEnabled(echoed), true);
  const countdown = busyCountdown(echoed);
  assert.ok(countdown);
  assert.equal(Math.round(countdown.remaining), 120);
});

test("a second busy window replaces the first in the banner", () => {
  let vm = connected();
  vm = onServerMessage(
    vm,
    message("frame", 2, frame(10.0, { constraints: [{ start: 10.0, end: 250.0 }] })),
  );
  assert.equal(busyCountdown(vm)?.end, 250.0);
  vm = onServerMessage(
    vm,
    message("frame", 3, frame(20.0, { constraints: [{ start: 20.0, end: 140.0 }] })),
  );
  assert.equal(busyCountdown(vm)?.end, 140.0);
  assert.equal(Math.round(busyCountdown(vm)!.remaining), 120);
});

test("clicks while disconnected produce no message and an error banner", () => {
  const vm = initialViewModel();
  const feedback = clickFeedback(vm, "busy_4_min");
  assert.equal(feedback.outbound, null);
  assert.equal(feedback.vm.banner, "not connected");
  const door = clickDoor(vm, "D");
  assert.equal(door.outbound, null);
});

test("door glyph state follows the latest frame", () => {
  let vm = connected();
  assert.equal(doorStates(vm).get("D"), "closed");
  vm = onServerMessage(
    vm,
    message("frame", 2, frame(1.0, { doors: [{ id: "D", state: "open" }] })),
  );
  assert.equal(doorStates(vm).get("D"), "open");
  vm = onServerMessage(
    vm,
    message("frame", 3, frame(16.0, { doors: [{ id: "D", state: "closed" }] })),
  );
  assert.equal(doorStates(vm).get("D"), "closed", "auto-close shows on later frames");
});

test("disconnect clears derived state; reconnect rebuilds from hello", () => {
  let vm = connected();
  vm = onServerMessage(vm, message("frame", 2, frame(1.0)));
  vm = onClose(vm);
  assert.equal(vm.hello, null);
  assert.equal(vm.frame, null);
  vm = onOpen(vm);
  vm = onServerMessage(vm, message("hello", 1, HELLO));
  assert.equal(vm.hello?.n_robots, 3);
});

test("world transform maps map bounds inside the canvas", () => {
  const t = worldTransform(HELLO.map, 800, 400, 40);
  for (const node of HELLO.map.nodes) {
    const [x, y] = toScreen(t, node.x, node.y);
    assert.ok(x >= 40 - 1e-9 && x <= 760 + 1e-9, `x ${x} inside`);
    assert.ok(y >= 40 - 1e-9 && y <= 360 + 1e-9, `y ${y} inside`);
  }
  // y axis flips: larger world y is closer to the canvas top
  const [, yLow] = toScreen(t, 0, 0);
  const [, yHigh] = toScreen(t, 0, 1);
  assert.ok(yHigh < yLow);
});

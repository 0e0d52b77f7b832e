// Socket wiring and DOM glue: a single WebSocket feeds the view model; a
// requestAnimationFrame loop renders the latest state; buttons emit protocol
// messages with a single retry before surfacing an error banner.

import { FeedbackKind, parseServerMessage } from "./protocol.js";
import {
  ViewModel,
  busyCountdown,
  clickDoor,
  clickFeedback,
  feedbackButtonsEnabled,
  initialViewModel,
  onClose,
  onOpen,
  onServerMessage,
} from "./viewmodel.js";
import { render } from "./view.js";

let vm: ViewModel = initialViewModel();
let socket: WebSocket | null = null;

const canvas = document.getElementById("floor") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusLine = document.getElementById("status")!;
const bannerLine = document.getElementById("banner")!;
const logList = document.getElementById("log")!;
const busy2 = document.getElementById("busy2") as HTMLButtonElement;
const busy4 = document.getElementById("busy4") as HTMLButtonElement;
const doorButtons = document.getElementById("doors")!;

function wsUrl(): string {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${location.host}/ws`;
}

function connect(): void {
  socket = new WebSocket(wsUrl());
  socket.onopen = () => {
    vm = onOpen(vm);
  };
  socket.onmessage = (event: MessageEvent) => {
    const message = parseServerMessage(
      typeof event.data === "string" ? event.data : "");
    if (message === null) return;
    vm = onServerMessage(vm, message);
    if (message.type === "hello") rebuildDoorButtons();
  };
  socket.onclose = () => {
    vm = onClose(vm);
    setTimeout(connect, 1000); // reconnect resumes with a fresh hello
  };
  socket.onerror = () => socket?.close();
}

function sendWithRetry(payload: string): void {
  const trySend = () => {
    if (socket && socket.readyState === WebSocket.OPEN) {
      socket.send(payload);
      return true;
    }
    return false;
  };
  if (!trySend()) {
    setTimeout(() => {
      if (!trySend()) {
        vm = { ...vm, banner: "send failed; not connected" };
      }
    }, 200);
  }
}

function pressFeedback(kind: FeedbackKind): void {
  const { vm: next, outbound } = clickFeedback(vm, kind);
  vm = next;
  if (outbound !== null) sendWithRetry(JSON.stringify(outbound));
}

function pressDoor(door: string): void {
  const { vm: next, outbound } = clickDoor(vm, door);
  vm = next;
  if (outbound !== null) sendWithRetry(JSON.stringify(outbound));
}

function rebuildDoorButtons(): void {
  doorButtons.textContent = "";
  if (!vm.hello) return;
  for (const door of vm.hello.map.doors) {
    const button = document.createElement("button");
    button.textContent = `Open door ${door.id}`;
    button.onclick = () => pressDoor(door.id);
    doorButtons.appendChild(button);
  }
}

function refreshChrome(): void {
  const frame = vm.frame;
  const countdown = busyCountdown(vm);
  statusLine.textContent =
    `${vm.connection}` +
    (vm.hello ? ` | ${vm.hello.scenario}` : "") +
    (frame ? ` | t=${frame.tick.toFixed(1)}s` : "");
  if (countdown) {
    bannerLine.textContent = `Busy for ${countdown.remaining.toFixed(0)} s (until t=${countdown.end.toFixed(0)})`;
    bannerLine.className = "banner busy";
  } else if (vm.banner) {
    bannerLine.textContent = vm.banner;
    bannerLine.className = "banner error";
  } else {
    bannerLine.textContent = "";
    bannerLine.className = "banner";
  }
  const enabled = feedbackButtonsEnabled(vm);
  busy2.disabled = !enabled;
  busy4.disabled = !enabled;
  logList.textContent = vm.log
    .slice(-12)
    .map((entry) => `[${entry.tick.toFixed(1)}] ${entry.text}`)
    .join("\n");
}

function frameLoop(): void {
  render(ctx, vm, canvas.width, canvas.height);
  refreshChrome();
  requestAnimationFrame(frameLoop);
}

busy2.onclick = () => pressFeedback("busy_2_min");
busy4.onclick = () => pressFeedback("busy_4_min");

connect();
requestAnimationFrame(frameLoop);

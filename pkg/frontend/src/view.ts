// Canvas renderer: floor plan from the hello geometry, one avatar per robot,
// remaining trajectories as fading polylines, door glyphs color-coded by state.

import { HelloPayload, RobotPayload } from "./protocol.js";
import { ViewModel, doorStates } from "./viewmodel.js";

export interface Transform {
  scale: number;
  offsetX: number;
  offsetY: number;
  height: number;
}

export function worldTransform(
  map: HelloPayload["map"],
  width: number,
  height: number,
  margin = 40,
): Transform {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const node of map.nodes) {
    minX = Math.min(minX, node.x);
    maxX = Math.max(maxX, node.x);
    minY = Math.min(minY, node.y);
    maxY = Math.max(maxY, node.y);
  }
  const spanX = Math.max(maxX - minX, 1e-6);
  const spanY = Math.max(maxY - minY, 1e-6);
  const scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
  return {
    scale,
    offsetX: margin - minX * scale + ((width - 2 * margin) - spanX * scale) / 2,
    offsetY: margin - minY * scale + ((height - 2 * margin) - spanY * scale) / 2,
    height,
  };
}

export function toScreen(t: Transform, x: number, y: number): [number, number] {
  // canvas y grows downward; world y grows upward
  return [t.offsetX + x * t.scale, t.height - (t.offsetY + y * t.scale)];
}

const ROBOT_COLORS = ["#2f81f7", "#d29922", "#a371f7", "#3fb950", "#f0883e"];

export function robotColor(id: number): string {
  return ROBOT_COLORS[id % ROBOT_COLORS.length];
}

export function render(ctx: CanvasRenderingContext2D, vm: ViewModel,
                       width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  if (!vm.hello) {
    ctx.fillStyle = "#8b949e";
    ctx.font = "14px system-ui";
    ctx.fillText("waiting for hello ...", 20, 30);
    return;
  }
  const map = vm.hello.map;
  const t = worldTransform(map, width, height);
  const nodeById = new Map(map.nodes.map((n) => [n.id, n]));
  const states = doorStates(vm);

  for (const edge of map.edges) {
    const a = nodeById.get(edge.from);
    const b = nodeById.get(edge.to);
    if (!a || !b) continue;
    const [ax, ay] = toScreen(t, a.x, a.y);
    const [bx, by] = toScreen(t, b.x, b.y);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    if (edge.door) {
      ctx.setLineDash([6, 4]);
      ctx.strokeStyle = states.get(edge.door) === "open" ? "#3fb950" : "#f85149";
      ctx.lineWidth = 3;
    } else {
      ctx.setLineDash([]);
      ctx.strokeStyle = "#30363d";
      ctx.lineWidth = 4;
    }
    ctx.stroke();
    ctx.setLineDash([]);
    if (edge.door) {
      const mx = (ax + bx) / 2;
      const my = (ay + by) / 2;
      ctx.fillStyle = states.get(edge.door) === "open" ? "#3fb950" : "#f85149";
      ctx.fillRect(mx - 5, my - 5, 10, 10);
      ctx.fillStyle = "#c9d1d9";
      ctx.font = "11px system-ui";
      ctx.fillText(edge.door, mx + 8, my - 6);
    }
  }

  for (const station of map.stations) {
    const node = nodeById.get(station.node);
    if (!node) continue;
    const [x, y] = toScreen(t, node.x, node.y);
    ctx.fillStyle = station.kind === "base" ? "#1f6feb" : "#6e7681";
    ctx.fillRect(x - 7, y - 7, 14, 14);
    ctx.fillStyle = "#c9d1d9";
    ctx.font = "12px system-ui";
    ctx.fillText(station.id, x + 10, y + 4);
  }

  if (vm.frame) {
    for (const robot of vm.frame.robots) {
      drawTrajectory(ctx, t, robot);
    }
    for (const robot of vm.frame.robots) {
      drawRobot(ctx, t, robot);
    }
  }
}

function drawTrajectory(ctx: CanvasRenderingContext2D, t: Transform,
                        robot: RobotPayload): void {
  const points = robot.trajectory;
  if (points.length < 2) return;
  const color = robotColor(robot.id);
  // remaining path fades toward its far end
  for (let i = 0; i + 1 < points.length; i++) {
    const [ax, ay] = toScreen(t, points[i][0], points[i][1]);
    const [bx, by] = toScreen(t, points[i + 1][0], points[i + 1][1]);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.strokeStyle = color;
    ctx.globalAlpha = Math.max(0.15, 0.8 - 0.25 * i);
    ctx.lineWidth = 2;
    ctx.stroke();
  }
  ctx.globalAlpha = 1.0;
}

function drawRobot(ctx: CanvasRenderingContext2D, t: Transform,
                   robot: RobotPayload): void {
  const [x, y] = toScreen(t, robot.pose.x, robot.pose.y);
  ctx.beginPath();
  ctx.arc(x, y, 9, 0, 2 * Math.PI);
  ctx.fillStyle = robotColor(robot.id);
  ctx.fill();
  ctx.strokeStyle = "#0d1117";
  ctx.lineWidth = 2;
  ctx.stroke();
  // heading tick (screen y is flipped)
  ctx.beginPath();
  ctx.moveTo(x, y);
  ctx.lineTo(x + 14 * Math.cos(robot.pose.heading), y - 14 * Math.sin(robot.pose.heading));
  ctx.strokeStyle = "#c9d1d9";
  ctx.stroke();
  ctx.fillStyle = "#c9d1d9";
  ctx.font = "11px system-ui";
  ctx.fillText(`R${robot.id} ${robot.status}`, x + 12, y + 14);
}

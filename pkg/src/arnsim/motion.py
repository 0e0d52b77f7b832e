"""Waypoint routing and pose advancement along polyline trajectories."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .world import Pose, WorldMap, normalize_heading

ON_POLYLINE_TOLERANCE_M = 1e-6


class RoutingError(ValueError):
    """No route exists between the requested nodes."""


class TrackingError(ValueError):
    """Pose does not lie on the trajectory polyline."""


@dataclass(frozen=True)
class Trajectory:
    """Ordered 2D waypoints; consecutive points are endpoints of one edge (or equal)."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError("trajectory requires at least one point")

    def total_length(self) -> float:
        total = 0.0
        for (x0, y0), (x1, y1) in zip(self.points, self.points[1:]):
            total += math.hypot(x1 - x0, y1 - y0)
        return total

    @property
    def start(self) -> tuple[float, float]:
        return self.points[0]

    @property
    def end(self) -> tuple[float, float]:
        return self.points[-1]


def shortest_path(world: WorldMap, from_node: str, to_node: str,
                  avoid_door_edges: bool = False) -> list[str]:
    """Minimum total edge length path as a node id sequence.

    Ties are broken by the lexicographically smallest node id sequence.
    `avoid_door_edges` restricts the search to edges without a door (used by
    symbolic planning, where doorways are crossed only by a dedicated action).
    """
    if not world.has_node(from_node):
        raise RoutingError(f"unknown node '{from_node}'")
    if not world.has_node(to_node):
        raise RoutingError(f"unknown node '{to_node}'")
    if from_node == to_node:
        return [from_node]

    heap: list[tuple[float, tuple[str, ...]]] = [(0.0, (from_node,))]
    settled: set[str] = set()
    while heap:
        dist, path = heapq.heappop(heap)
        current = path[-1]
        if current in settled:
            continue
        settled.add(current)
        if current == to_node:
            return list(path)
        for edge in world.edges_at(current):
            if avoid_door_edges and edge.door_id is not None:
                continue
            neighbor = edge.other(current)
            if neighbor not in settled:
                heapq.heappush(heap, (dist + edge.length, path + (neighbor,)))
    raise RoutingError(f"no path from '{from_node}' to '{to_node}'"
                       + (" avoiding door edges" if avoid_door_edges else ""))


def path_length(world: WorldMap, path: list[str]) -> float:
    total = 0.0
    for a, b in zip(path, path[1:]):
        edge = next(e for e in world.edges_at(a) if e.other(a) == b)
        total += edge.length
    return total


def resolve_approach_node(world: WorldMap, target: str, from_node: str,
                          avoid_door_edges: bool = False) -> str:
    """Node an approach action moves to: the target node itself, or for a door
    target the reachable endpoint of its edge nearest to `from_node` (ties to
    the smaller node id)."""
    if world.has_door(target):
        edge = world.door_edge(target)
        best: tuple[float, str] | None = None
        for endpoint in sorted((edge.a, edge.b)):
            try:
                dist = path_length(world, shortest_path(world, from_node, endpoint,
                                                        avoid_door_edges=avoid_door_edges))
            except RoutingError:
                continue
            if best is None or dist < best[0] - 1e-12:
                best = (dist, endpoint)
        if best is None:
            raise RoutingError(f"no endpoint of door '{target}' reachable from '{from_node}'")
        return best[1]
    if not world.has_node(target):
        raise RoutingError(f"unknown approach target '{target}'")
    return target


def route(action, from_node: str, world: WorldMap) -> Trajectory:
    """Trajectory realizing one symbolic action from `from_node`.

    Only approach actions produce motion; every other action yields the
    single-point trajectory at the current node.
    """
    if getattr(action, "kind", None) == "approach":
        goal = resolve_approach_node(world, action.target, from_node)
        path = shortest_path(world, from_node, goal)
        return Trajectory(tuple(world.coords(n) for n in path))
    return Trajectory((world.coords(from_node),))


def _project_arc_position(trajectory: Trajectory, x: float, y: float) -> float:
    """Arc length of (x, y) along the polyline; raises if farther than tolerance."""
    best_s, best_err = 0.0, math.inf
    travelled = 0.0
    if len(trajectory.points) == 1:
        px, py = trajectory.points[0]
        err = math.hypot(x - px, y - py)
        if err > ON_POLYLINE_TOLERANCE_M:
            raise TrackingError(f"pose ({x}, {y}) not on single-point trajectory {trajectory.points[0]}")
        return 0.0
    for (x0, y0), (x1, y1) in zip(trajectory.points, trajectory.points[1:]):
        seg_len = math.hypot(x1 - x0, y1 - y0)
        if seg_len > 0:
            t = ((x - x0) * (x1 - x0) + (y - y0) * (y1 - y0)) / (seg_len * seg_len)
            t = min(1.0, max(0.0, t))
            cx, cy = x0 + t * (x1 - x0), y0 + t * (y1 - y0)
            err = math.hypot(x - cx, y - cy)
            if err < best_err:
                best_err = err
                best_s = travelled + t * seg_len
        travelled += seg_len
    if best_err > ON_POLYLINE_TOLERANCE_M:
        raise TrackingError(f"pose ({x}, {y}) is {best_err:.2e} m off the trajectory")
    return best_s


def point_at_arc(trajectory: Trajectory, s: float) -> tuple[float, float, float]:
    """Position and heading at arc length `s` (heading = current segment direction)."""
    points = trajectory.points
    if len(points) == 1:
        return points[0][0], points[0][1], 0.0
    travelled = 0.0
    heading = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        seg_len = math.hypot(x1 - x0, y1 - y0)
        if seg_len == 0:
            continue
        heading = math.atan2(y1 - y0, x1 - x0)
        if travelled + seg_len >= s - 1e-12:
            t = (s - travelled) / seg_len
            t = min(1.0, max(0.0, t))
            return x0 + t * (x1 - x0), y0 + t * (y1 - y0), heading
        travelled += seg_len
    return points[-1][0], points[-1][1], heading


def advance_pose(pose: Pose, trajectory: Trajectory, speed: float, dt: float) -> tuple[Pose, float]:
    """Move `speed * dt` meters farther along the polyline, clamped at the end.

    Returns the new pose (heading = direction of the current segment) and the
    fraction of total arc length completed (1.0 for single-point trajectories).
    """
    if speed <= 0:
        raise ValueError("speed must be positive")
    if dt <= 0:
        raise ValueError("dt must be positive")
    total = trajectory.total_length()
    if total == 0.0:
        _project_arc_position(trajectory, pose.x, pose.y)
        return pose, 1.0
    s = _project_arc_position(trajectory, pose.x, pose.y)
    s_new = min(total, s + speed * dt)
    x, y, heading = point_at_arc(trajectory, s_new)
    return Pose(x, y, normalize_heading(heading)), s_new / total

"""Forward-search task planning under human-unavailability time windows.

Single-robot plans are found by uniform-cost search over the symbolic state
space (location, facing, carried objects, object placements, door states),
minimizing estimated completion time. Service at a human-assisted door is
modeled as an expected wait that must fit entirely outside every activated
unavailability window, so arriving during a window defers the door leg to the
window's end. Team planning runs the single-robot planner per robot against a
shared table of reserved door-service intervals, then makes one refinement
pass.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

from .motion import RoutingError, path_length, shortest_path
from .world import (DEFAULT_CAPACITY, DEFAULT_SPEED_MPS, Delivery, SymbolicState,
                    TaskSpec, WorldMap)

ACTION_KINDS = ("approach", "opendoor", "gothrough", "load", "unload", "wait")

WAIT_GRANULARITY_S = 1.0


class PlanningError(ValueError):
    """Goal unreachable; carries the failing subgoal and optionally the robot."""

    def __init__(self, message: str, subgoal: str | None = None, robot_id: int | None = None):
        self.subgoal = subgoal
        self.robot_id = robot_id
        prefix = f"robot {robot_id}: " if robot_id is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class PlannerCosts:
    """Fixed action durations used by planning estimates and execution timers."""

    load_s: float = 10.0
    unload_s: float = 10.0
    align_s: float = 1.0
    door_service_s: float = 20.0      # expected human response once available
    robot_door_open_s: float = 3.0    # unassisted doors only


DEFAULT_COSTS = PlannerCosts()


@dataclass(frozen=True)
class Action:
    kind: str
    target: str | None = None
    estimated_duration: float = 1.0
    assisted: bool = False  # opendoor on a human-assisted door

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind '{self.kind}'")
        if self.estimated_duration <= 0:
            raise ValueError("estimated_duration must be positive")

    def label(self) -> str:
        return f"{self.kind}({self.target})" if self.target else self.kind

    def record(self) -> dict:
        return {"kind": self.kind, "target": self.target,
                "estimated_duration": round(self.estimated_duration, 6)}


@dataclass(frozen=True)
class Plan:
    """Queue of actions; the front is the next to execute."""

    actions: tuple[Action, ...] = ()

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)

    def front(self) -> Action | None:
        return self.actions[0] if self.actions else None

    def pop(self) -> "Plan":
        return Plan(self.actions[1:])

    def records(self) -> list[dict]:
        return [a.record() for a in self.actions]


@dataclass(frozen=True)
class PlanSet:
    plans: tuple[Plan, ...] = ()

    def __len__(self) -> int:
        return len(self.plans)

    def __getitem__(self, robot_id: int) -> Plan:
        return self.plans[robot_id]

    def serialize(self) -> bytes:
        payload = [plan.records() for plan in self.plans]
        return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()


@dataclass(frozen=True)
class AssistUnavailable:
    """Half-open window [start, end) during which the human cannot assist."""

    start: float
    end: float

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"window start {self.start} must precede end {self.end}")


@dataclass(frozen=True)
class ConstraintSet:
    """Normalized (sorted, merged, non-overlapping) unavailability windows."""

    windows: tuple[AssistUnavailable, ...] = ()

    @staticmethod
    def normalized(windows) -> "ConstraintSet":
        spans = sorted((w.start, w.end) for w in windows)
        merged: list[tuple[float, float]] = []
        for start, end in spans:
            if merged and start <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], end))
            else:
                merged.append((start, end))
        return ConstraintSet(tuple(AssistUnavailable(s, e) for s, e in merged))

    def active_at(self, t: float) -> AssistUnavailable | None:
        for w in self.windows:
            if w.start <= t < w.end:
                return w
        return None

    def union(self, windows) -> "ConstraintSet":
        return ConstraintSet.normalized(list(self.windows) + list(windows))

    def drop_expired(self, clock: float) -> "ConstraintSet":
        return ConstraintSet(tuple(w for w in self.windows if not w.end < clock))

    def __bool__(self) -> bool:
        return bool(self.windows)


EMPTY_CONSTRAINTS = ConstraintSet()


def fit_service(start: float, duration: float, constraints: ConstraintSet) -> float:
    """Earliest service start >= `start` whose [s, s + duration) avoids every window."""
    s = start
    for w in constraints.windows:
        if w.end <= s:
            continue
        if w.start < s + duration:  # overlap with [s, s+duration)
            s = w.end
    return s


@dataclass(frozen=True)
class ResidualGoal:
    """What remains for one robot: undelivered deliveries, optional end location."""

    deliveries: tuple[Delivery, ...] = ()
    at_node: str | None = None

    @staticmethod
    def from_task(task: TaskSpec, state: SymbolicState) -> "ResidualGoal":
        remaining = tuple(d for d in task.deliveries
                          if state.object_location(d.object_id) != "base")
        return ResidualGoal(deliveries=remaining)


def _walk_schedule(plan: Plan, start: float, constraints: ConstraintSet):
    """Yield (action, action_start, action_end) with door service fitted
    outside the unavailability windows."""
    t = start
    for action in plan:
        if action.kind == "opendoor" and action.assisted:
            s = fit_service(t, action.estimated_duration, constraints)
            yield action, s, s + action.estimated_duration
            t = s + action.estimated_duration
        else:
            yield action, t, t + action.estimated_duration
            t += action.estimated_duration


def estimate_completion(plan: Plan, start: float, constraints: ConstraintSet) -> float:
    """Completion time of `plan` begun at `start` under the door-service model."""
    t = start
    for _, _, end in _walk_schedule(plan, start, constraints):
        t = end
    return t


def service_intervals(plan: Plan, start: float, constraints: ConstraintSet) -> list[tuple[float, float]]:
    """Assisted-door service intervals [s, e) scheduled by `plan`."""
    return [(s, e) for action, s, e in _walk_schedule(plan, start, constraints)
            if action.kind == "opendoor" and action.assisted]


@dataclass(frozen=True)
class _SearchState:
    location: str
    facing: str | None
    carried: frozenset[str]
    objects: tuple[tuple[str, str], ...]
    doors: tuple[tuple[str, str], ...]


def _door_free_distances(world: WorldMap, origin: str) -> dict[str, float]:
    """Shortest door-free distance from `origin` to every reachable node."""
    dists = {origin: 0.0}
    heap = [(0.0, origin)]
    while heap:
        d, node = heapq.heappop(heap)
        if d > dists.get(node, math.inf):
            continue
        for edge in world.edges_at(node):
            if edge.door_id is not None:
                continue
            other = edge.other(node)
            nd = d + edge.length
            if nd < dists.get(other, math.inf) - 1e-12:
                dists[other] = nd
                heapq.heappush(heap, (nd, other))
    return dists


def plan_single(state: SymbolicState, goal: ResidualGoal, world: WorldMap,
                constraints: ConstraintSet, now: float, *,
                speed: float = DEFAULT_SPEED_MPS,
                capacity: int = DEFAULT_CAPACITY,
                costs: PlannerCosts = DEFAULT_COSTS) -> Plan:
    """Minimum-estimated-completion plan achieving `goal` from `state`.

    Ties break toward fewer actions, then the lexicographically smallest
    (kind, target) sequence. Door service is fitted outside `constraints`.
    Raises PlanningError when some subgoal cannot be reached.
    """
    for d in goal.deliveries:
        if state.object_location(d.object_id) is None:
            raise PlanningError(f"object '{d.object_id}' not present in state",
                                subgoal=f"deliver {d.object_id}")
        if not world.has_station(d.pickup_station) or not world.has_station(d.dropoff_station):
            raise PlanningError(f"delivery '{d.object_id}' references unknown station",
                                subgoal=f"deliver {d.object_id}")
    if goal.at_node is not None and not world.has_node(goal.at_node):
        raise PlanningError(f"goal node '{goal.at_node}' does not exist",
                            subgoal=f"reach {goal.at_node}")

    goal_objects = {d.object_id: d for d in goal.deliveries}
    start_objects = tuple(sorted((oid, place) for oid, place in state.object_locations
                                 if oid in goal_objects))
    start = _SearchState(
        location=state.robot_location,
        facing=state.facing_door,
        carried=frozenset(oid for oid, place in start_objects if place == "robot"),
        objects=start_objects,
        doors=tuple(sorted(dict(state.door_states).items())),
    )

    def is_goal(s: _SearchState) -> bool:
        if any(place != "base" for _, place in s.objects):
            return False
        return goal.at_node is None or s.location == goal.at_node

    def successors(s: _SearchState, t: float):
        objects = dict(s.objects)
        doors = dict(s.doors)
        # An assisted opening is transient (the door auto-closes): it survives
        # only into an immediate gothrough, so every other successor sees the
        # door closed again.
        expired = {door_id: ("closed" if world.door(door_id).assisted and state == "open"
                             else state)
                   for door_id, state in doors.items()}
        expired_key = tuple(sorted(expired.items()))
        reach = _door_free_distances(world, s.location)

        for node_id in sorted(reach):
            if node_id == s.location:
                continue
            duration = reach[node_id] / speed
            yield (Action("approach", node_id, duration),
                   _SearchState(node_id, None, s.carried, s.objects, expired_key),
                   t + duration)

        for door in sorted(world.doors, key=lambda d: d.door_id):
            edge = world.door_edge(door.door_id)
            candidates = [n for n in sorted((edge.a, edge.b)) if n in reach]
            if not candidates:
                continue
            endpoint = min(candidates, key=lambda n: (reach[n], n))
            if s.facing == door.door_id and s.location == endpoint:
                continue  # already engaged
            travel = reach[endpoint]
            duration = travel / speed if travel > 0 else costs.align_s
            yield (Action("approach", door.door_id, duration),
                   _SearchState(endpoint, door.door_id, s.carried, s.objects, expired_key),
                   t + duration)

        if s.facing is not None:
            door = world.door(s.facing)
            edge = world.door_edge(s.facing)
            if s.location in (edge.a, edge.b):
                if doors.get(s.facing, "closed") == "closed":
                    if door.assisted:
                        service_start = fit_service(t, costs.door_service_s, constraints)
                        end = service_start + costs.door_service_s
                        action = Action("opendoor", s.facing, costs.door_service_s, assisted=True)
                    else:
                        end = t + costs.robot_door_open_s
                        action = Action("opendoor", s.facing, costs.robot_door_open_s)
                    new_doors = dict(expired)
                    new_doors[s.facing] = "open"
                    yield (action,
                           _SearchState(s.location, s.facing, s.carried, s.objects,
                                        tuple(sorted(new_doors.items()))),
                           end)
                else:
                    duration = edge.length / speed
                    new_doors = dict(expired)
                    if door.assisted:
                        new_doors[s.facing] = "closed"  # closes behind the crossing
                    else:
                        new_doors[s.facing] = "open"
                    yield (Action("gothrough", s.facing, duration),
                           _SearchState(edge.other(s.location), None, s.carried, s.objects,
                                        tuple(sorted(new_doors.items()))),
                           t + duration)

        for object_id in sorted(objects):
            place = objects[object_id]
            delivery = goal_objects[object_id]
            if place == "robot":
                dropoff = world.station(delivery.dropoff_station)
                if s.location == dropoff.node_id:
                    new_objects = dict(objects)
                    new_objects[object_id] = "base"
                    yield (Action("unload", object_id, costs.unload_s),
                           _SearchState(s.location, s.facing, s.carried - {object_id},
                                        tuple(sorted(new_objects.items())), expired_key),
                           t + costs.unload_s)
            elif place not in ("base",):
                station = world.station(place) if world.has_station(place) else None
                if (station is not None and s.location == station.node_id
                        and len(s.carried) < capacity):
                    new_objects = dict(objects)
                    new_objects[object_id] = "robot"
                    yield (Action("load", object_id, costs.load_s),
                           _SearchState(s.location, s.facing, s.carried | {object_id},
                                        tuple(sorted(new_objects.items())), expired_key),
                           t + costs.load_s)

    # Uniform-cost search; priority = (completion, action count, lexicographic actions).
    counter = 0
    start_key = (now, 0, ())
    heap: list[tuple[float, int, tuple, int, _SearchState, tuple[Action, ...]]] = [
        (now, 0, (), counter, start, ())]
    settled: set[_SearchState] = set()
    while heap:
        t, n_actions, lex, _, s, actions = heapq.heappop(heap)
        if s in settled:
            continue
        settled.add(s)
        if is_goal(s):
            return Plan(actions)
        for action, next_state, t_next in successors(s, t):
            if next_state in settled:
                continue
            counter += 1
            heapq.heappush(heap, (t_next, n_actions + 1,
                                  lex + ((action.kind, action.target or ""),),
                                  counter, next_state, actions + (action,)))

    undone = [d.object_id for d in goal.deliveries]
    subgoal = (f"deliver {', '.join(undone)}" if undone else f"reach {goal.at_node}")
    raise PlanningError(f"no plan achieves subgoal ({subgoal})", subgoal=subgoal)


def plan_team(states: list[SymbolicState], goals: list[ResidualGoal], world: WorldMap,
              constraints: ConstraintSet, now: float, *,
              speeds: list[float] | None = None,
              capacities: list[int] | None = None,
              costs: PlannerCosts = DEFAULT_COSTS) -> PlanSet:
    """One plan per robot with door-service intervals reserved sequentially.

    Robots plan in index order, each seeing the windows already reserved by
    lower-indexed robots; one refinement pass then replans every robot against
    all other robots' reservations. Deterministic for identical inputs.
    """
    n = len(states)
    if len(goals) != n:
        raise ValueError(f"expected {n} goals, got {len(goals)}")
    speeds = speeds or [DEFAULT_SPEED_MPS] * n
    capacities = capacities or [DEFAULT_CAPACITY] * n

    def plan_one(i: int, windows: ConstraintSet) -> Plan:
        try:
            return plan_single(states[i], goals[i], world, windows, now,
                               speed=speeds[i], capacity=capacities[i], costs=costs)
        except PlanningError as err:
            raise PlanningError(str(err), subgoal=err.subgoal, robot_id=i) from err

    plans: list[Plan] = []
    reservations: list[list[tuple[float, float]]] = []
    for i in range(n):
        seen = constraints.union(AssistUnavailable(s, e)
                                 for reserved in reservations for s, e in reserved)
        plan = plan_one(i, seen)
        plans.append(plan)
        reservations.append(service_intervals(plan, now, seen))

    for i in range(n):
        others = constraints.union(
            AssistUnavailable(s, e)
            for j, reserved in enumerate(reservations) if j != i
            for s, e in reserved)
        refined = plan_one(i, others)
        if refined != plans[i]:
            plans[i] = refined
        reservations[i] = service_intervals(plans[i], now, others)

    return PlanSet(tuple(plans))


def validate_plan(plan: Plan, state: SymbolicState, goal: ResidualGoal, world: WorldMap,
                  *, capacity: int = DEFAULT_CAPACITY) -> bool:
    """Check the precondition chain of `plan` step by step from `state`.

    Used by tests and by the mediator's internal assertions; independent of
    the search in plan_single.
    """
    goal_objects = {d.object_id: d for d in goal.deliveries}
    location = state.robot_location
    facing = state.facing_door
    doors = dict(state.door_states)
    objects = {oid: place for oid, place in state.object_locations if oid in goal_objects}
    carried = {oid for oid, place in objects.items() if place == "robot"}

    for action in plan:
        for door_id, state in list(doors.items()):
            if state == "open" and world.door(door_id).assisted \
                    and not (action.kind == "gothrough" and action.target == door_id):
                doors[door_id] = "closed"  # assisted openings expire unless crossed at once
        if action.kind == "approach":
            if world.has_door(action.target):
                edge = world.door_edge(action.target)
                options = []
                for endpoint in sorted((edge.a, edge.b)):
                    try:
                        options.append(
                            (path_length(world, shortest_path(world, location, endpoint,
                                                              avoid_door_edges=True)),
                             endpoint))
                    except RoutingError:
                        continue
                if not options:
                    return False
                location = min(options)[1]
                facing = action.target
            else:
                try:
                    shortest_path(world, location, action.target, avoid_door_edges=True)
                except RoutingError:
                    return False
                location = action.target
                facing = None
        elif action.kind == "opendoor":
            edge = world.door_edge(action.target) if world.has_door(action.target) else None
            if edge is None or facing != action.target or location not in (edge.a, edge.b):
                return False
            if doors.get(action.target, "closed") != "closed":
                return False
            doors[action.target] = "open"
        elif action.kind == "gothrough":
            edge = world.door_edge(action.target) if world.has_door(action.target) else None
            if edge is None or facing != action.target or location not in (edge.a, edge.b):
                return False
            if doors.get(action.target, "closed") != "open":
                return False
            location = edge.other(location)
            facing = None
            if world.door(action.target).assisted:
                doors[action.target] = "closed"
        elif action.kind == "load":
            delivery = goal_objects.get(action.target)
            if delivery is None or objects.get(action.target) != delivery.pickup_station:
                return False
            if world.station(delivery.pickup_station).node_id != location:
                return False
            if len(carried) >= capacity:
                return False
            objects[action.target] = "robot"
            carried.add(action.target)
        elif action.kind == "unload":
            delivery = goal_objects.get(action.target)
            if delivery is None or action.target not in carried:
                return False
            if world.station(delivery.dropoff_station).node_id != location:
                return False
            objects[action.target] = "base"
            carried.discard(action.target)
        elif action.kind == "wait":
            pass
        else:
            return False

    if any(place != "base" for place in objects.values()):
        return False
    return goal.at_node is None or location == goal.at_node

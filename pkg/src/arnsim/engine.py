"""Deterministic discrete-time trial executor, metrics, and the batch harness.

A trial steps the world at a fixed dt: robot poses advance along their
trajectories, symbolic actions execute, the virtual human works/answers the
door, feedback flows through the mediator inbox, and the mediator replans the
team whenever the activated constraint set changes. Everything is driven by
two named RNG streams (human, door) derived from the trial seed, so a trial
is a pure function of (scenario, seed, feedback_enabled).
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from collections import deque
from dataclasses import dataclass, field

from .human import (HumanState, init_human, is_check_tick, step_human)
from .mediator import (DoorCommand, FeedbackEvent, Frame, Mediator, RobotSnapshot,
                       goal_reached)
from .motion import Trajectory, advance_pose, resolve_approach_node, shortest_path
from .planner import Action, DEFAULT_COSTS, PlannerCosts
from .stats import mean, sample_sd, welch_test
from .world import Pose, RobotState, Scenario, SymbolicState, WorldMap

DEFAULT_DT_S = 0.5
DEFAULT_T_MAX_S = 3600.0

CONFIG_WITH = "with_feedback"
CONFIG_WITHOUT = "without_feedback"
CONFIG_LIVE = "live"


class TrialError(RuntimeError):
    """Trial aborted for an internal reason (planner failure, conservation breach)."""


def derive_stream(seed: int, name: str) -> random.Random:
    """Named RNG stream with a platform-stable derived seed."""
    digest = hashlib.sha256(f"{seed}/{name}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


@dataclass(frozen=True)
class TrialResult:
    seed: int
    config: str
    t_h: float
    t_r: tuple[float, ...]
    t_all: float
    t_r_last: float
    replan_count: int
    feedback_issued: bool
    aborted: bool


@dataclass
class TrialTrace:
    events: list[dict] = field(default_factory=list)

    def append(self, t: float, event: str, **payload):
        self.events.append({"t": round(t, 6), "event": event, **payload})

    def to_ndjson(self) -> str:
        return "\n".join(json.dumps(e, sort_keys=True, separators=(",", ":"))
                         for e in self.events) + "\n"


@dataclass
class _DoorRuntime:
    state: str
    close_at: float | None = None


@dataclass
class _Exec:
    action: Action | None = None
    trajectory: Trajectory | None = None
    path_nodes: tuple[str, ...] = ()
    timer: float = 0.0
    crossing: bool = False      # gothrough motion underway
    completed: bool = False
    handoff: Action | None = None  # queued action waiting for current motion to finish

    def executing(self) -> bool:
        return self.action is not None and not self.completed


class Trial:
    """Single deterministic trial; step with tick() or drive to completion with run()."""

    def __init__(self, scenario: Scenario, seed: int, feedback_enabled: bool, *,
                 virtual_human: bool = True, dt: float = DEFAULT_DT_S,
                 t_max: float = DEFAULT_T_MAX_S, costs: PlannerCosts = DEFAULT_COSTS,
                 collect_frames: bool = False):
        self.scenario = scenario
        self.world: WorldMap = scenario.world
        self.seed = seed
        self.feedback_enabled = feedback_enabled
        self.virtual_human = virtual_human
        self.dt = dt
        self.t_max = t_max
        self.costs = costs
        self.collect_frames = collect_frames

        self.clock = 0.0
        self.tick_index = 0
        self.aborted = False
        self.abort_cause: str | None = None
        self.finished = False
        self._human_done_logged = False

        self.trace = TrialTrace()
        self.frames: list[Frame] = []
        self.inbox: deque = deque()

        n = scenario.n_robots
        self.robots: list[RobotState] = []
        self.node: list[str] = []
        self.facing: list[str | None] = []
        self.execs: list[_Exec] = [_Exec() for _ in range(n)]
        self.done_at: list[float | None] = [None] * n
        for spec in scenario.robots:
            x, y = self.world.coords(spec.start_node)
            self.robots.append(RobotState(spec.robot_id, Pose(x, y, 0.0),
                                          symbolic_location=spec.start_node))
            self.node.append(spec.start_node)
            self.facing.append(None)

        self.placements: dict[str, str] = scenario.initial_object_locations()
        self._initial_objects = dict(self.placements)
        self.doors: dict[str, _DoorRuntime] = {
            d.door_id: _DoorRuntime(d.state, None) for d in self.world.doors}

        self.human: HumanState | None = None
        if virtual_human:
            self.human = init_human(scenario.human, derive_stream(seed, "human"),
                                    n_robots=n, feedback_enabled=feedback_enabled)
        self.door_rng = derive_stream(seed, "door")
        self.human_rng = derive_stream(seed, "human-ticks")

        self.mediator = Mediator(
            world=self.world,
            tasks=tuple(scenario.task_for(i) for i in range(n)),
            speeds=[spec.speed_mps for spec in scenario.robots],
            capacities=[spec.capacity for spec in scenario.robots],
            costs=costs,
        )
        self.mediator.initialize(self._snapshots())
        for i in range(n):
            if goal_reached(self._symbolic(i), self.mediator.tasks[i]):
                self.done_at[i] = 0.0
        self.trace.append(0.0, "trial_start", seed=seed,
                          feedback=feedback_enabled, robots=n,
                          objects=sorted(self.placements))

    # -- snapshots ---------------------------------------------------------

    def _planning_node(self, i: int) -> str:
        exec_ = self.execs[i]
        if exec_.trajectory is not None and not exec_.completed and len(exec_.path_nodes) > 1:
            return self._next_node_ahead(i)
        return self.node[i]

    def _next_node_ahead(self, i: int) -> str:
        exec_ = self.execs[i]
        traj = exec_.trajectory
        pose = self.robots[i].pose
        travelled = 0.0
        for idx, ((x0, y0), (x1, y1)) in enumerate(zip(traj.points, traj.points[1:])):
            seg = ((x1 - x0) ** 2 + (y1 - y0) ** 2) ** 0.5
            travelled += seg
            if ((pose.x - x1) ** 2 + (pose.y - y1) ** 2) ** 0.5 <= 1e-9:
                continue
            dx0 = ((pose.x - x0) ** 2 + (pose.y - y0) ** 2) ** 0.5
            if dx0 <= seg + 1e-9 and abs(
                    dx0 + ((pose.x - x1) ** 2 + (pose.y - y1) ** 2) ** 0.5 - seg) <= 1e-6:
                return exec_.path_nodes[idx + 1]
        return exec_.path_nodes[-1]

    def _symbolic(self, i: int) -> SymbolicState:
        # Assisted doors are snapshotted closed: they auto-close, so plans must
        # never rely on a transiently open doorway.
        door_states = {}
        for door in self.world.doors:
            if door.assisted:
                door_states[door.door_id] = "closed"
            else:
                door_states[door.door_id] = self.doors[door.door_id].state
        objects = {}
        for object_id, place in self.placements.items():
            objects[object_id] = "robot" if place == f"robot:{i}" else place
        return SymbolicState(
            robot_location=self._planning_node(i),
            facing_door=self.facing[i],
            door_states=tuple(sorted(door_states.items())),
            object_locations=tuple(sorted(objects.items())),
        )

    def _status(self, i: int) -> str:
        if self.done_at[i] is not None and not self.execs[i].executing():
            return "done"
        exec_ = self.execs[i]
        if exec_.action is None:
            return "idle"
        if self._waiting_at_door(i):
            return "waiting-at-door"
        if exec_.trajectory is not None and not exec_.completed and exec_.trajectory.total_length() > 0:
            return "moving"
        return "idle"

    def _remaining_trajectory(self, i: int) -> Trajectory:
        exec_ = self.execs[i]
        pose = self.robots[i].pose
        if exec_.trajectory is None or exec_.completed:
            return Trajectory(((pose.x, pose.y),))
        points = [(pose.x, pose.y)]
        passed = False
        for idx, point in enumerate(exec_.trajectory.points):
            if not passed:
                if self._point_ahead(exec_.trajectory, pose, idx):
                    passed = True
                    points.append(point)
            else:
                points.append(point)
        return Trajectory(tuple(points))

    @staticmethod
    def _point_ahead(traj: Trajectory, pose: Pose, idx: int) -> bool:
        travelled = 0.0
        pose_s = None
        for j, ((x0, y0), (x1, y1)) in enumerate(zip(traj.points, traj.points[1:])):
            seg = ((x1 - x0) ** 2 + (y1 - y0) ** 2) ** 0.5
            d0 = ((pose.x - x0) ** 2 + (pose.y - y0) ** 2) ** 0.5
            d1 = ((pose.x - x1) ** 2 + (pose.y - y1) ** 2) ** 0.5
            if pose_s is None and seg > 0 and abs(d0 + d1 - seg) <= 1e-6:
                pose_s = travelled + d0
            travelled += seg
        if pose_s is None:
            pose_s = 0.0
        vertex_s = 0.0
        for j in range(idx):
            (x0, y0), (x1, y1) = traj.points[j], traj.points[j + 1]
            vertex_s += ((x1 - x0) ** 2 + (y1 - y0) ** 2) ** 0.5
        return vertex_s > pose_s + 1e-9

    def _snapshots(self) -> list[RobotSnapshot]:
        snaps = []
        for i in range(self.scenario.n_robots):
            exec_ = self.execs[i]
            snaps.append(RobotSnapshot(
                robot_id=i,
                pose=self.robots[i].pose,
                trajectory=self._remaining_trajectory(i),
                status=self._status(i),
                action_completed=exec_.completed,
                symbolic=self._symbolic(i),
                executing=exec_.executing(),
            ))
        return snaps

    # -- door helpers ------------------------------------------------------

    def _waiting_at_door(self, i: int) -> bool:
        exec_ = self.execs[i]
        if exec_.action is None or exec_.completed:
            return False
        if exec_.action.kind == "opendoor" and exec_.action.assisted:
            return self.doors[exec_.action.target].state == "closed"
        if exec_.action.kind == "gothrough" and not exec_.crossing:
            return self.doors[exec_.action.target].state == "closed"
        return False

    def _requesting(self, i: int) -> bool:
        """Waiting at an assisted door and not holding off for a communicated window."""
        if not self._waiting_at_door(i):
            return False
        return self.mediator.constraints.active_at(self.clock) is None

    def requesting_count(self) -> int:
        return sum(1 for i in range(self.scenario.n_robots) if self._requesting(i))

    def _open_door(self, door_id: str, cause: str):
        runtime = self.doors[door_id]
        door = self.world.door(door_id)
        runtime.state = "open"
        runtime.close_at = self.clock + door.auto_close_after_s
        self.trace.append(self.clock, "door_opened", door=door_id, cause=cause)

    def _door_for_human(self) -> str | None:
        """Assisted door with the most requesting robots (ties to smaller id)."""
        counts: dict[str, int] = {}
        for i in range(self.scenario.n_robots):
            if self._requesting(i):
                counts.setdefault(self.execs[i].action.target, 0)
                counts[self.execs[i].action.target] += 1
        if not counts:
            return None
        return min(counts, key=lambda d: (-counts[d], d))

    # -- action execution --------------------------------------------------

    def _start_action(self, i: int, action: Action):
        exec_ = self.execs[i]
        exec_.action = action
        exec_.trajectory = None
        exec_.path_nodes = ()
        exec_.timer = 0.0
        exec_.crossing = False
        exec_.completed = False
        exec_.handoff = None
        self.trace.append(self.clock, "action_started", robot=i,
                          kind=action.kind, target=action.target)

        if action.kind == "approach":
            try:
                goal = resolve_approach_node(self.world, action.target, self.node[i],
                                             avoid_door_edges=True)
                path = shortest_path(self.world, self.node[i], goal, avoid_door_edges=True)
            except Exception as err:
                raise TrialError(f"robot {i} cannot route {action.label()}: {err}") from err
            exec_.path_nodes = tuple(path)
            exec_.trajectory = Trajectory(tuple(self.world.coords(n) for n in path))
            if exec_.trajectory.total_length() == 0:
                exec_.timer = self.costs.align_s
        elif action.kind == "gothrough":
            edge = self.world.door_edge(action.target)
            far = edge.other(self.node[i])
            exec_.path_nodes = (self.node[i], far)
            exec_.trajectory = Trajectory((self.world.coords(self.node[i]),
                                           self.world.coords(far)))
        elif action.kind == "opendoor":
            if not action.assisted:
                exec_.timer = self.costs.robot_door_open_s
        elif action.kind == "load":
            exec_.timer = self.costs.load_s
        elif action.kind == "unload":
            exec_.timer = self.costs.unload_s
        elif action.kind == "wait":
            exec_.timer = action.estimated_duration

    def _complete_action(self, i: int):
        exec_ = self.execs[i]
        action = exec_.action
        exec_.completed = True
        robot = self.robots[i]

        if action.kind == "approach":
            target_node = exec_.path_nodes[-1]
            self.node[i] = target_node
            robot.symbolic_location = target_node
            if self.world.has_door(action.target):
                self.facing[i] = action.target
                edge = self.world.door_edge(action.target)
                ox, oy = self.world.coords(edge.other(target_node))
                nx, ny = self.world.coords(target_node)
                robot.pose = Pose(robot.pose.x, robot.pose.y,
                                  math.atan2(oy - ny, ox - nx))
            else:
                self.facing[i] = None
        elif action.kind == "gothrough":
            far = exec_.path_nodes[-1]
            self.node[i] = far
            robot.symbolic_location = far
            self.facing[i] = None
        elif action.kind == "load":
            self.placements[action.target] = f"robot:{i}"
            robot.carried.add(action.target)
            self.trace.append(self.clock, "object_moved", object=action.target,
                              place=f"robot:{i}")
        elif action.kind == "unload":
            self.placements[action.target] = "base"
            robot.carried.discard(action.target)
            self.trace.append(self.clock, "object_moved", object=action.target, place="base")
        self.trace.append(self.clock, "action_completed", robot=i,
                          kind=action.kind, target=action.target)

        if exec_.handoff is not None:
            next_action = exec_.handoff
            self._start_action(i, next_action)

    def _advance_robot(self, i: int):
        exec_ = self.execs[i]
        if exec_.action is None or exec_.completed:
            return
        action = exec_.action
        robot = self.robots[i]
        spec = self.scenario.robots[i]

        if action.kind in ("approach", "gothrough"):
            if action.kind == "gothrough" and not exec_.crossing:
                if self.doors[action.target].state != "open":
                    return  # blocked; waits and (maybe) requests
                exec_.crossing = True
            if exec_.trajectory.total_length() == 0:
                exec_.timer -= self.dt
                if exec_.timer <= 1e-9:
                    self._complete_action(i)
                return
            new_pose, fraction = advance_pose(robot.pose, exec_.trajectory,
                                              spec.speed_mps, self.dt)
            robot.pose = new_pose
            robot.status = "moving"
            if fraction >= 1.0 - 1e-12:
                self._complete_action(i)
        elif action.kind == "opendoor":
            if self.doors[action.target].state == "open":
                self._complete_action(i)
            elif not action.assisted:
                exec_.timer -= self.dt
                if exec_.timer <= 1e-9:
                    self._open_door(action.target, cause=f"robot:{i}")
                    self._complete_action(i)
        else:  # load / unload / wait / align handled via timer
            exec_.timer -= self.dt
            if exec_.timer <= 1e-9:
                self._complete_action(i)

    def _apply_command(self, i: int, action: Action, replanned: bool):
        exec_ = self.execs[i]
        if not replanned:
            if exec_.action is None or exec_.completed:
                self._start_action(i, action)
            return
        # Replanning: a robot mid-motion first completes travel to the node
        # ahead, then begins the new plan; everything else restarts now.
        mid_motion = (exec_.action is not None and not exec_.completed
                      and exec_.trajectory is not None
                      and exec_.trajectory.total_length() > 0
                      and ((exec_.action.kind == "approach" and not self._at_vertex(i))
                           or exec_.crossing))
        if mid_motion:
            if exec_.action.kind == "approach" and not exec_.crossing:
                next_node = self._next_node_ahead(i)
                pose = self.robots[i].pose
                exec_.trajectory = Trajectory(((pose.x, pose.y),
                                               self.world.coords(next_node)))
                exec_.path_nodes = (self.node[i], next_node)
            exec_.handoff = action
        else:
            self._start_action(i, action)

    def _at_vertex(self, i: int) -> bool:
        pose = self.robots[i].pose
        exec_ = self.execs[i]
        if exec_.trajectory is None:
            return True
        return any(((pose.x - x) ** 2 + (pose.y - y) ** 2) ** 0.5 <= 1e-9
                   for x, y in exec_.trajectory.points)

    # -- conservation ------------------------------------------------------

    def _check_conservation(self):
        if set(self.placements) != set(self._initial_objects):
            raise TrialError("object set changed during trial")
        carried_union: set[str] = set()
        for i, robot in enumerate(self.robots):
            for obj in robot.carried:
                if self.placements.get(obj) != f"robot:{i}":
                    raise TrialError(f"object '{obj}' carried by robot {i} but placed "
                                     f"at {self.placements.get(obj)}")
                if obj in carried_union:
                    raise TrialError(f"object '{obj}' duplicated across robots")
                carried_union.add(obj)
        for obj, place in self.placements.items():
            if place.startswith("robot:"):
                rid = int(place.split(":", 1)[1])
                if obj not in self.robots[rid].carried:
                    raise TrialError(f"object '{obj}' placed on robot {rid} but not carried")
            elif place != "base" and not self.world.has_station(place):
                raise TrialError(f"object '{obj}' at unknown place '{place}'")

    # -- tick loop ---------------------------------------------------------

    def tick(self) -> Frame:
        clock = self.clock

        for door_id in sorted(self.doors):
            runtime = self.doors[door_id]
            if runtime.state == "open" and runtime.close_at is not None \
                    and clock >= runtime.close_at:
                runtime.state = "closed"
                runtime.close_at = None
                self.trace.append(clock, "door_closed", door=door_id)

        if self.human is not None:
            check_now = is_check_tick(self.tick_index, self.dt)
            waiting = self.requesting_count()
            _, action, door_open = step_human(self.human, waiting, clock, self.dt,
                                              self.human_rng, self.door_rng,
                                              check_now=check_now)
            if action is not None:
                self.trace.append(clock, "human_action", kind=action.kind,
                                  duration=action.duration)
                if action.kind in ("A4", "A5"):
                    kind = "busy_2_min" if action.kind == "A4" else "busy_4_min"
                    self.inbox.append(FeedbackEvent(kind, clock))
                    self.trace.append(clock, "feedback_issued", kind=kind)
            if door_open:
                target = self._door_for_human()
                if target is not None:
                    self._open_door(target, cause="human")

        snapshots = self._snapshots()
        doors = [(door_id, self.doors[door_id].state) for door_id in sorted(self.doors)]
        result = self.mediator.step(snapshots, doors, self.inbox, clock)
        if result.feedback is not None:
            self.trace.append(clock, "feedback_processed", kind=result.feedback.kind,
                              issued_at=result.feedback.issued_at)
        if result.replanned:
            self.trace.append(clock, "replan", count=self.mediator.replan_count,
                              windows=[(w.start, w.end)
                                       for w in self.mediator.constraints.windows])
        for command in result.door_commands:
            self._open_door(command.door_id, cause="command")
        for i, action in result.commands:
            self._apply_command(i, action, result.replanned)
        if self.collect_frames:
            self.frames.append(result.frame)

        for i in range(self.scenario.n_robots):
            self._advance_robot(i)
            if self.done_at[i] is None and goal_reached(self._symbolic(i),
                                                        self.mediator.tasks[i]):
                self.done_at[i] = clock + self.dt
                self.robots[i].status = "done"
                self.trace.append(clock + self.dt, "robot_done", robot=i)

        self._check_conservation()
        self.clock = clock + self.dt
        self.tick_index += 1

        human_done = self.human is None or self.human.own_task_done_at is not None
        if self.human is not None and self.human.own_task_done_at is not None \
                and not self._human_done_logged:
            self._human_done_logged = True
            self.trace.append(self.human.own_task_done_at, "human_done")
        robots_done = all(d is not None for d in self.done_at)
        if robots_done and human_done:
            self.finished = True
        elif self.clock >= self.t_max:
            self.aborted = True
            self.abort_cause = "t_max"
            self.finished = True
        return result.frame

    def run(self):
        while not self.finished:
            self.tick()
        config = (CONFIG_LIVE if self.human is None
                  else CONFIG_WITH if self.feedback_enabled else CONFIG_WITHOUT)
        self.trace.append(self.clock, "trial_end",
                          seed=self.seed, config=config,
                          aborted=self.aborted, cause=self.abort_cause,
                          t_h=(self.human.own_task_done_at if self.human is not None
                               and self.human.own_task_done_at is not None
                               else (0.0 if self.human is None else self.clock)),
                          t_r=[d if d is not None else self.clock for d in self.done_at],
                          replans=self.mediator.replan_count,
                          feedback=(self.human.feedback_issued
                                    if self.human is not None else
                                    bool(self.mediator.feedback_seen)))
        return compute_metrics(self.trace), self.trace


def compute_metrics(trace: TrialTrace) -> TrialResult:
    """Derive the trial metrics from a complete (or aborted) trace."""
    end = next((e for e in reversed(trace.events) if e["event"] == "trial_end"), None)
    if end is None:
        raise ValueError("trace has no trial_end event")
    t_r = tuple(float(x) for x in end["t_r"])
    t_h = float(end["t_h"])
    return TrialResult(
        seed=int(end["seed"]),
        config=end["config"],
        t_h=t_h,
        t_r=t_r,
        t_all=t_h + sum(t_r),
        t_r_last=max(t_r) if t_r else 0.0,
        replan_count=int(end["replans"]),
        feedback_issued=bool(end["feedback"]),
        aborted=bool(end["aborted"]),
    )


def run_trial(scenario: Scenario, seed: int, feedback_enabled: bool, *,
              dt: float = DEFAULT_DT_S, t_max: float = DEFAULT_T_MAX_S,
              costs: PlannerCosts = DEFAULT_COSTS,
              collect_frames: bool = False) -> tuple[TrialResult, TrialTrace]:
    trial = Trial(scenario, seed, feedback_enabled, dt=dt, t_max=t_max, costs=costs,
                  collect_frames=collect_frames)
    return trial.run()


@dataclass(frozen=True)
class BatchResult:
    rows: tuple[TrialResult, ...]
    summary: dict
    p_value_t_all: float | None
    n_trials: int
    low_power: bool
    abort_fraction: float
    failed: bool


def run_batch(scenario: Scenario, n_trials: int, base_seed: int, *,
              configs: tuple[str, ...] = (CONFIG_WITH, CONFIG_WITHOUT),
              dt: float = DEFAULT_DT_S, t_max: float = DEFAULT_T_MAX_S,
              costs: PlannerCosts = DEFAULT_COSTS) -> BatchResult:
    """Paired-seed batch: seeds base_seed..base_seed+n-1 run under each configuration."""
    if n_trials < 2:
        raise ValueError("n_trials must be at least 2")
    rows: list[TrialResult] = []
    for seed in range(base_seed, base_seed + n_trials):
        for config in configs:
            result, _ = run_trial(scenario, seed, config == CONFIG_WITH,
                                  dt=dt, t_max=t_max, costs=costs)
            rows.append(TrialResult(seed=result.seed, config=config, t_h=result.t_h,
                                    t_r=result.t_r, t_all=result.t_all,
                                    t_r_last=result.t_r_last,
                                    replan_count=result.replan_count,
                                    feedback_issued=result.feedback_issued,
                                    aborted=result.aborted))

    summary: dict = {}
    for config in configs:
        sample = [r for r in rows if r.config == config]
        summary[config] = {
            "n": len(sample),
            "t_h": {"mean": mean([r.t_h for r in sample]),
                    "sd": sample_sd([r.t_h for r in sample])},
            "t_all": {"mean": mean([r.t_all for r in sample]),
                      "sd": sample_sd([r.t_all for r in sample])},
            "t_r_last": {"mean": mean([r.t_r_last for r in sample]),
                         "sd": sample_sd([r.t_r_last for r in sample])},
            "aborts": sum(1 for r in sample if r.aborted),
        }

    p_value = None
    if CONFIG_WITH in configs and CONFIG_WITHOUT in configs:
        with_all = [r.t_all for r in rows if r.config == CONFIG_WITH]
        without_all = [r.t_all for r in rows if r.config == CONFIG_WITHOUT]
        p_value = welch_test(with_all, without_all)

    aborts = sum(1 for r in rows if r.aborted)
    abort_fraction = aborts / len(rows)
    return BatchResult(
        rows=tuple(rows),
        summary=summary,
        p_value_t_all=p_value,
        n_trials=n_trials,
        low_power=n_trials < 30,
        abort_fraction=abort_fraction,
        failed=abort_fraction > 0.2,
    )


def results_csv(batch: BatchResult, n_robots: int) -> str:
    """One row per trial: seed, config, T_H, T_R1..T_RN, T_all, T_R_last, replans, aborted."""
    header = (["seed", "config", "T_H"]
              + [f"T_R{i + 1}" for i in range(n_robots)]
              + ["T_all", "T_R_last", "replans", "aborted"])
    lines = [",".join(header)]
    for r in batch.rows:
        cells = [str(r.seed), r.config, f"{r.t_h:.1f}"]
        cells += [f"{x:.1f}" for x in r.t_r]
        cells += [f"{r.t_all:.1f}", f"{r.t_r_last:.1f}", str(r.replan_count),
                  "1" if r.aborted else "0"]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def summary_json(batch: BatchResult) -> str:
    payload = {
        "n_trials": batch.n_trials,
        "summary": batch.summary,
        "p_value_t_all": batch.p_value_t_all,
        "statistical_test": "welch_t_two_sided",
        "low_power": batch.low_power,
        "abort_fraction": batch.abort_fraction,
        "failed": batch.failed,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"

"""Mediation loop: frame assembly, feedback intake, constraint activation, replanning.

Each tick the mediator issues the front action of every unfinished robot's
plan, refreshes trajectories and poses, assembles one Frame, converts at most
one queued feedback event into activated constraint windows, and replans the
whole team exactly when the normalized constraint set changes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .human import BUSY_SECONDS, FEEDBACK_KINDS
from .motion import Trajectory
from .planner import (ConstraintSet, AssistUnavailable, Plan, PlanSet, PlannerCosts,
                      DEFAULT_COSTS, ResidualGoal, plan_team)
from .world import Pose, SymbolicState, TaskSpec, WorldMap


class MediatorError(RuntimeError):
    """Internal consistency violation (mismatched per-robot list lengths)."""


@dataclass(frozen=True)
class FeedbackEvent:
    kind: str  # busy_2_min | busy_4_min
    issued_at: float

    def __post_init__(self):
        if self.kind not in FEEDBACK_KINDS:
            raise ValueError(f"unknown feedback kind '{self.kind}'")


@dataclass(frozen=True)
class DoorCommand:
    door_id: str
    issued_at: float


@dataclass(frozen=True)
class RobotFrame:
    robot_id: int
    pose: Pose
    trajectory: Trajectory
    action_label: str
    status: str


@dataclass(frozen=True)
class Frame:
    tick: float
    robots: tuple[RobotFrame, ...]
    doors: tuple[tuple[str, str], ...]
    constraints: ConstraintSet


def vslz(trajectories: list[Trajectory], poses: list[Pose], clock: float,
         doors: list[tuple[str, str]], constraints: ConstraintSet,
         labels: list[str] | None = None,
         statuses: list[str] | None = None) -> Frame:
    """Assemble one frame from per-robot trajectories and poses (pure)."""
    n = len(poses)
    labels = labels if labels is not None else ["idle"] * n
    statuses = statuses if statuses is not None else ["idle"] * n
    if not (len(trajectories) == len(labels) == len(statuses) == n):
        raise MediatorError(
            f"per-robot lists disagree: {len(trajectories)} trajectories, {n} poses, "
            f"{len(labels)} labels, {len(statuses)} statuses")
    robots = tuple(
        RobotFrame(i, poses[i], trajectories[i], labels[i], statuses[i])
        for i in range(n))
    return Frame(tick=clock, robots=robots, doors=tuple(doors), constraints=constraints)


def get_fdk(inbox: deque):
    """Dequeue at most one event (oldest first); None when the inbox is empty."""
    if inbox:
        return inbox.popleft()
    return None


def cnsts(event: FeedbackEvent | None, current: ConstraintSet, clock: float) -> ConstraintSet:
    """Convert feedback into activated constraint windows.

    A busy-k event replaces any existing window with [clock, clock + 60k);
    expired windows (end < clock) are dropped either way.
    """
    kept = current.drop_expired(clock)
    if event is None:
        return kept
    span = BUSY_SECONDS[event.kind]
    return ConstraintSet.normalized([AssistUnavailable(clock, clock + span)])


def goal_reached(state: SymbolicState, task: TaskSpec) -> bool:
    """True when every delivery of the task has its object at the base."""
    return all(state.object_location(d.object_id) == "base" for d in task.deliveries)


@dataclass
class RobotSnapshot:
    """Engine-provided view of one robot for a mediator step."""

    robot_id: int
    pose: Pose
    trajectory: Trajectory
    status: str
    action_completed: bool
    symbolic: SymbolicState
    executing: bool = False


@dataclass
class StepResult:
    commands: list  # (robot_id, Action) for robots with a newly issued front action
    frame: Frame
    replanned: bool
    door_commands: list = field(default_factory=list)
    feedback: FeedbackEvent | None = None
    terminal: bool = False
    abort_cause: str | None = None


@dataclass
class Mediator:
    """Owns constraints, plans, and the replanning trigger for one trial."""

    world: WorldMap
    tasks: tuple[TaskSpec, ...]
    speeds: list[float]
    capacities: list[int]
    costs: PlannerCosts = DEFAULT_COSTS
    constraints: ConstraintSet = ConstraintSet()
    plans: PlanSet | None = None
    trajectories: list[Trajectory] = field(default_factory=list)
    poses: list[Pose] = field(default_factory=list)
    clock: float = 0.0
    replan_count: int = 0
    feedback_seen: list[FeedbackEvent] = field(default_factory=list)

    def initialize(self, snapshots: list[RobotSnapshot]) -> None:
        """Compute the initial team plan (empty constraint set)."""
        goals = [ResidualGoal.from_task(self.tasks[i], snapshots[i].symbolic)
                 for i in range(len(snapshots))]
        self.plans = plan_team([s.symbolic for s in snapshots], goals, self.world,
                               self.constraints, self.clock,
                               speeds=self.speeds, capacities=self.capacities,
                               costs=self.costs)

    def step(self, snapshots: list[RobotSnapshot], doors: list[tuple[str, str]],
             inbox: deque, clock: float) -> StepResult:
        if self.plans is None:
            raise MediatorError("mediator not initialized")
        if len(snapshots) != len(self.plans):
            raise MediatorError(f"expected {len(self.plans)} robots, got {len(snapshots)}")
        self.clock = clock

        commands = []
        plans = list(self.plans.plans)
        done_flags = []
        for snap in snapshots:
            i = snap.robot_id
            at_goal = goal_reached(snap.symbolic, self.tasks[i])
            done_flags.append(at_goal and len(plans[i]) == 0)
            if at_goal and len(plans[i]) == 0:
                continue
            if snap.action_completed and len(plans[i]) > 0:
                plans[i] = plans[i].pop()
            front = plans[i].front()
            if front is not None and (snap.action_completed or not snap.executing):
                commands.append((i, front))
        self.plans = PlanSet(tuple(plans))

        labels = []
        statuses = []
        for snap in snapshots:
            plan = self.plans[snap.robot_id]
            front = plan.front()
            if done_flags[snap.robot_id]:
                labels.append("done")
                statuses.append("done")
            else:
                labels.append(front.label() if front is not None else "idle")
                statuses.append(snap.status)
        frame = vslz([s.trajectory for s in snapshots], [s.pose for s in snapshots],
                     clock, doors, self.constraints, labels, statuses)
        self.trajectories = [s.trajectory for s in snapshots]
        self.poses = [s.pose for s in snapshots]

        door_commands = []
        event = get_fdk(inbox)
        feedback_event = None
        if isinstance(event, DoorCommand):
            door_commands.append(event)
        elif isinstance(event, FeedbackEvent):
            feedback_event = event
            self.feedback_seen.append(event)

        replanned = False
        new_constraints = cnsts(feedback_event, self.constraints, clock)
        if new_constraints != self.constraints:
            goals = [ResidualGoal.from_task(self.tasks[i], snapshots[i].symbolic)
                     for i in range(len(snapshots))]
            self.plans = plan_team([s.symbolic for s in snapshots], goals, self.world,
                                   new_constraints, clock,
                                   speeds=self.speeds, capacities=self.capacities,
                                   costs=self.costs)
            self.constraints = new_constraints
            self.replan_count += 1
            replanned = True
            commands = []
            for snap in snapshots:
                i = snap.robot_id
                if done_flags[i]:
                    continue
                front = self.plans[i].front()
                if front is not None:
                    commands.append((i, front))

        return StepResult(commands=commands, frame=frame, replanned=replanned,
                          door_commands=door_commands, feedback=feedback_event,
                          terminal=all(done_flags))

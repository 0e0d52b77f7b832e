"""Scripted virtual human for batch trials.

The human works through a timed dummy task, occasionally tilts the viewing
device, gets deeply engaged ("busy") once per trial for two or four minutes,
and answers the door for waiting robots. Door-opening is sampled every 20
seconds per waiting robot: probability 0.6 normally, 0.2 while busy, 0.9 once
the dummy task is finished. When feedback is enabled the busy period is
announced as it starts ("I will be busy for N minutes"); when disabled the
same busy period occurs silently. Opening the door while busy breaks focus:
the interruption costs the door-opening time plus a refocus penalty, and the
busy period is pushed back by the same amount.

Randomness is drawn from two named streams so that enabling feedback does not
perturb the door draws: the human stream feeds task/busy sampling and tilts,
the door stream feeds one draw per robot slot at every 20 s check.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .world import HumanParams

DOOR_CHECK_PERIOD_S = 20.0
MIN_OWN_TASK_S = 60.0

FEEDBACK_KINDS = ("busy_2_min", "busy_4_min")
BUSY_SECONDS = {"busy_2_min": 120.0, "busy_4_min": 240.0}

ACTION_WORK = "A1"
ACTION_TILT_LEFT = "A2"
ACTION_TILT_RIGHT = "A3"
ACTION_FEEDBACK_BUSY_2 = "A4"
ACTION_FEEDBACK_BUSY_4 = "A5"
ACTION_OPEN_DOOR = "A6"

_FEEDBACK_ACTION = {"busy_2_min": ACTION_FEEDBACK_BUSY_2, "busy_4_min": ACTION_FEEDBACK_BUSY_4}


@dataclass(frozen=True)
class HumanAction:
    kind: str
    duration: float


@dataclass
class HumanState:
    params: HumanParams
    n_robots: int
    feedback_enabled: bool
    own_task_total: float
    own_task_remaining: float
    busy_schedule: tuple[float, str]          # (start time, busy_2_min | busy_4_min)
    feedback_plan: tuple[float, str] | None   # announcement; None when feedback disabled
    busy_until: float | None = None
    busy_triggered: bool = False
    feedback_issued: bool = False
    interruption_remaining: float = 0.0
    elapsed_human_time: float = 0.0
    own_task_done_at: float | None = None
    interruption_total: float = 0.0
    openings: int = 0
    openings_while_busy: int = 0
    tilts: int = 0

    def working(self) -> bool:
        return self.own_task_remaining > 0 and self.interruption_remaining <= 0

    def busy_at(self, clock: float) -> bool:
        return self.busy_until is not None and clock < self.busy_until


def init_human(params: HumanParams, rng: random.Random, n_robots: int,
               feedback_enabled: bool) -> HumanState:
    """Sample the dummy-task length and the busy schedule.

    The busy period is drawn whether or not feedback is enabled (the human is
    equally engaged either way); feedback_plan carries the announcement and is
    None when the feedback channel is off.
    """
    if params.own_task_mean_s <= 0:
        raise ValueError("own_task_mean_s must be positive")
    if params.own_task_sd_s < 0 or params.feedback_time_sd_s < 0:
        raise ValueError("standard deviations must be non-negative")

    total = max(MIN_OWN_TASK_S, rng.gauss(params.own_task_mean_s, params.own_task_sd_s))
    busy_time = rng.gauss(params.feedback_time_fraction * total, params.feedback_time_sd_s)
    busy_time = min(max(busy_time, 0.0), total)
    busy_kind = FEEDBACK_KINDS[0] if rng.random() < 0.5 else FEEDBACK_KINDS[1]
    schedule = (busy_time, busy_kind)
    return HumanState(
        params=params,
        n_robots=n_robots,
        feedback_enabled=feedback_enabled,
        own_task_total=total,
        own_task_remaining=total,
        busy_schedule=schedule,
        feedback_plan=schedule if feedback_enabled else None,
    )


def door_open_probability(human: HumanState, clock: float) -> float:
    """Per-robot door-opening probability at a 20 s check."""
    if human.busy_at(clock):
        return 0.2
    if human.own_task_remaining <= 0:
        return 0.9
    return 0.6


def is_check_tick(tick_index: int, dt: float) -> bool:
    """Door checks land on exact multiples of 20 s; dt must divide the period."""
    per_check = round(DOOR_CHECK_PERIOD_S / dt)
    if not math.isclose(per_check * dt, DOOR_CHECK_PERIOD_S):
        raise ValueError(f"dt {dt} must divide the {DOOR_CHECK_PERIOD_S} s check period")
    return tick_index % per_check == 0


def step_human(human: HumanState, waiting_robots: int, clock: float, dt: float,
               human_rng: random.Random, door_rng: random.Random, *,
               check_now: bool = False) -> tuple[HumanState, HumanAction | None, bool]:
    """Advance the human by one tick.

    `waiting_robots` is the number of robots currently asking for the door.
    `check_now` marks ticks on the 20 s grid; one uniform per robot slot is
    drawn there regardless of the waiting count, keeping the door stream
    aligned across configurations. Returns (state, newly started action or
    None, door_opened).
    """
    if dt > DOOR_CHECK_PERIOD_S:
        raise ValueError("dt must not exceed the door check period")
    costs = human.params.costs
    action: HumanAction | None = None
    door_open = False

    draws: list[float] = []
    if check_now:
        draws = [door_rng.random() for _ in range(human.n_robots)]

    if human.interruption_remaining > 0:
        human.interruption_remaining -= dt
        human.elapsed_human_time = clock + dt
        return human, None, False

    if (not human.busy_triggered and clock >= human.busy_schedule[0]
            and human.own_task_done_at is None):
        busy_time, kind = human.busy_schedule
        human.busy_triggered = True
        human.busy_until = clock + BUSY_SECONDS[kind]
        if human.feedback_enabled:
            human.feedback_issued = True
            action = HumanAction(_FEEDBACK_ACTION[kind], costs.feedback_s)
            human.interruption_remaining = costs.feedback_s - dt
            human.interruption_total += costs.feedback_s
            human.elapsed_human_time = clock + dt
            return human, action, False

    if check_now and waiting_robots > 0:
        p = door_open_probability(human, clock)
        door_open = any(d < p for d in draws[:waiting_robots])
        if door_open:
            duration = costs.open_door_s
            if human.busy_at(clock):
                duration += costs.focus_recovery_s
                human.busy_until += duration  # interrupted focus time is made up afterwards
                human.openings_while_busy += 1
            human.openings += 1
            action = HumanAction(ACTION_OPEN_DOOR, duration)
            if human.own_task_done_at is None:
                human.interruption_remaining = duration - dt
                human.interruption_total += duration
            human.elapsed_human_time = clock + dt
            return human, action, True

    if human.own_task_remaining > 0:
        tilt_draw = human_rng.random()
        if tilt_draw < human.params.tilt_rate:
            side_draw = human_rng.random()
            kind = ACTION_TILT_LEFT if side_draw < 0.5 else ACTION_TILT_RIGHT
            human.tilts += 1
            action = HumanAction(kind, costs.tilt_s)
            human.interruption_remaining = costs.tilt_s - dt
            human.interruption_total += costs.tilt_s
            human.elapsed_human_time = clock + dt
            return human, action, False
        human.own_task_remaining -= dt
        if human.own_task_remaining <= 1e-9:
            human.own_task_remaining = 0.0
            human.own_task_done_at = clock + dt
        human.elapsed_human_time = clock + dt
        return human, None, False

    human.elapsed_human_time = clock + dt
    return human, None, False

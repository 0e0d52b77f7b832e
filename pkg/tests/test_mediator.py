from __future__ import annotations

from collections import deque

import pytest

from arnsim.mediator import (DoorCommand, FeedbackEvent, MediatorError, cnsts, get_fdk,
                             goal_reached, vslz)
from arnsim.motion import Trajectory
from arnsim.planner import AssistUnavailable, ConstraintSet, EMPTY_CONSTRAINTS
from arnsim.world import Delivery, Pose, SymbolicState, TaskSpec


def test_vslz_empty_team():
    frame = vslz([], [], 10.0, [("D", "closed")], EMPTY_CONSTRAINTS)
    assert frame.robots == ()
    assert frame.tick == 10.0
    assert frame.doors == (("D", "closed"),)


def test_vslz_assembles_three_robots():
    poses = [Pose(float(i), 0.0, 0.0) for i in range(3)]
    trajectories = [Trajectory(((float(i), 0.0), (float(i) + 1.0, 0.0))) for i in range(3)]
    frame = vslz(trajectories, poses, 5.0, [], EMPTY_CONSTRAINTS,
                 labels=["a", "b", "c"], statuses=["moving"] * 3)
    assert len(frame.robots) == 3
    assert [rf.robot_id for rf in frame.robots] == [0, 1, 2]
    assert frame.robots[1].action_label == "b"


def test_vslz_stationary_robot_single_point_trajectory():
    pose = Pose(2.0, 3.0, 0.0)
    frame = vslz([Trajectory(((2.0, 3.0),))], [pose], 0.0, [], EMPTY_CONSTRAINTS)
    assert frame.robots[0].trajectory.points == ((2.0, 3.0),)


def test_vslz_length_mismatch_raises():
    with pytest.raises(MediatorError):
        vslz([], [Pose(0.0, 0.0)], 0.0, [], EMPTY_CONSTRAINTS)


def test_get_fdk_empty_inbox_is_none():
    assert get_fdk(deque()) is None


def test_get_fdk_fifo_one_per_tick():
    inbox = deque([FeedbackEvent("busy_2_min", 50.0), FeedbackEvent("busy_4_min", 51.0)])
    first = get_fdk(inbox)
    assert first.kind == "busy_2_min"
    second = get_fdk(inbox)
    assert second.kind == "busy_4_min"
    assert get_fdk(inbox) is None


def test_cnsts_busy_two_minutes():
    out = cnsts(FeedbackEvent("busy_2_min", 100.0), EMPTY_CONSTRAINTS, 100.0)
    assert [(w.start, w.end) for w in out.windows] == [(100.0, 220.0)]


def test_cnsts_busy_four_minutes():
    out = cnsts(FeedbackEvent("busy_4_min", 0.0), EMPTY_CONSTRAINTS, 0.0)
    assert [(w.start, w.end) for w in out.windows] == [(0.0, 240.0)]


def test_cnsts_expiry():
    current = ConstraintSet.normalized([AssistUnavailable(0.0, 50.0)])
    assert cnsts(None, current, 60.0) == EMPTY_CONSTRAINTS
    # end < clock is the expiry rule: at exactly the end the window is kept
    assert cnsts(None, current, 50.0) == current


def test_cnsts_replacement_semantics():
    current = ConstraintSet.normalized([AssistUnavailable(100.0, 220.0)])
    out = cnsts(FeedbackEvent("busy_4_min", 150.0), current, 150.0)
    assert [(w.start, w.end) for w in out.windows] == [(150.0, 390.0)]


def test_cnsts_feedback_kind_validated():
    with pytest.raises(ValueError):
        FeedbackEvent("busy_9_min", 0.0)


def _state(objects: dict) -> SymbolicState:
    return SymbolicState("B", None, (), tuple(sorted(objects.items())))


def test_goal_reached_empty_task():
    assert goal_reached(_state({}), TaskSpec(0))


def test_goal_reached_pending_delivery():
    task = TaskSpec(0, (Delivery("obj1", "L1", "B"),))
    assert not goal_reached(_state({"obj1": "L1"}), task)
    assert not goal_reached(_state({"obj1": "robot"}), task)
    assert goal_reached(_state({"obj1": "base"}), task)


def test_goal_reached_three_deliveries():
    task = TaskSpec(0, tuple(Delivery(f"o{i}", "L1", "B") for i in range(3)))
    assert goal_reached(_state({f"o{i}": "base" for i in range(3)}), task)
    assert not goal_reached(_state({"o0": "base", "o1": "base", "o2": "robot"}), task)


def test_door_command_carries_door_id():
    command = DoorCommand("D", 12.0)
    assert command.door_id == "D"

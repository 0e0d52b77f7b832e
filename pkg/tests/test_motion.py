from __future__ import annotations

import itertools
import math
import random

import pytest

from arnsim.motion import (RoutingError, TrackingError, Trajectory, advance_pose,
                           path_length, route, shortest_path)
from arnsim.planner import Action
from arnsim.world import Pose, load_world
from tests.conftest import random_world_doc


def floyd_warshall(world) -> dict[tuple[str, str], float]:
    """Independent all-pairs oracle for shortest path lengths."""
    ids = [n.node_id for n in world.nodes]
    dist = {(a, b): (0.0 if a == b else math.inf) for a in ids for b in ids}
    for e in world.edges:
        dist[(e.a, e.b)] = min(dist[(e.a, e.b)], e.length)
        dist[(e.b, e.a)] = min(dist[(e.b, e.a)], e.length)
    for k in ids:
        for a in ids:
            for b in ids:
                through = dist[(a, k)] + dist[(k, b)]
                if through < dist[(a, b)]:
                    dist[(a, b)] = through
    return dist


def all_simple_paths(world, a, b, limit=10):
    paths = []

    def extend(path, length):
        current = path[-1]
        if current == b:
            paths.append((length, tuple(path)))
            return
        if len(path) > limit:
            return
        for e in world.edges_at(current):
            nxt = e.other(current)
            if nxt not in path:
                extend(path + [nxt], length + e.length)

    extend([a], 0.0)
    return paths


def test_identity_path(office3_world):
    assert shortest_path(office3_world, "B", "B") == ["B"]


def test_three_node_chain():
    doc = {
        "map": {
            "nodes": [{"id": "n0", "x": 0.0, "y": 0.0}, {"id": "n1", "x": 1.0, "y": 0.0},
                      {"id": "n2", "x": 2.0, "y": 0.0}],
            "edges": [{"from": "n0", "to": "n1"}, {"from": "n1", "to": "n2"}],
            "stations": [{"id": "BASE", "node": "n0", "kind": "base"}],
        },
        "robots": [], "tasks": [],
    }
    world = load_world(doc).world
    assert shortest_path(world, "n0", "n2") == ["n0", "n1", "n2"]


def test_diagonal_beats_perimeter():
    # Right triangle: direct 5.0 edge vs 3.0 + 4.0 detour.
    doc = {
        "map": {
            "nodes": [{"id": "a", "x": 0.0, "y": 0.0}, {"id": "b", "x": 3.0, "y": 0.0},
                      {"id": "c", "x": 3.0, "y": 4.0}],
            "edges": [{"from": "a", "to": "b"}, {"from": "b", "to": "c"},
                      {"from": "a", "to": "c"}],
            "stations": [{"id": "BASE", "node": "a", "kind": "base"}],
        },
        "robots": [], "tasks": [],
    }
    world = load_world(doc).world
    assert shortest_path(world, "a", "c") == ["a", "c"]


def test_office3_route_from_base(office3_world):
    traj = route(Action("approach", "L2", 10.0), "B", office3_world)
    assert traj.points == ((0.0, 0.0), (2.0, 0.0), (4.0, 0.0), (6.0, 0.0))


def test_route_zero_length(office3_world):
    traj = route(Action("approach", "B", 1.0), "B", office3_world)
    assert traj.points == ((0.0, 0.0),)


def test_route_non_motion_action(office3_world):
    traj = route(Action("load", "obj1", 5.0), "L2", office3_world)
    assert traj.points == ((6.0, 0.0),)


def test_unreachable_raises():
    doc = {
        "map": {
            "nodes": [{"id": "a", "x": 0.0, "y": 0.0}, {"id": "b", "x": 1.0, "y": 0.0}],
            "edges": [{"from": "a", "to": "b", "door": "d0"}],
            "doors": [{"id": "d0"}],
            "stations": [{"id": "BASE", "node": "a", "kind": "base"}],
        },
        "robots": [], "tasks": [],
    }
    world = load_world(doc).world
    with pytest.raises(RoutingError):
        shortest_path(world, "a", "b", avoid_door_edges=True)


def test_shortest_path_matches_floyd_warshall_oracle():
    rng = random.Random(60)
    for _ in range(50):
        doc = random_world_doc(rng, max_nodes=20, max_doors=0)
        world = load_world(doc).world
        oracle = floyd_warshall(world)
        ids = [n.node_id for n in world.nodes]
        for a, b in itertools.islice(itertools.permutations(ids, 2), 60):
            path = shortest_path(world, a, b)
            assert path[0] == a and path[-1] == b
            assert path_length(world, path) == pytest.approx(oracle[(a, b)], abs=1e-9)


def test_shortest_path_lexicographic_tie_break():
    # Square with unit sides: two equal paths n0->n1->n3 and n0->n2->n3.
    doc = {
        "map": {
            "nodes": [{"id": "n0", "x": 0.0, "y": 0.0}, {"id": "n1", "x": 1.0, "y": 0.0},
                      {"id": "n2", "x": 0.0, "y": 1.0}, {"id": "n3", "x": 1.0, "y": 1.0}],
            "edges": [{"from": "n0", "to": "n1"}, {"from": "n0", "to": "n2"},
                      {"from": "n1", "to": "n3"}, {"from": "n2", "to": "n3"}],
            "stations": [{"id": "BASE", "node": "n0", "kind": "base"}],
        },
        "robots": [], "tasks": [],
    }
    world = load_world(doc).world
    assert shortest_path(world, "n0", "n3") == ["n0", "n1", "n3"]
    # exhaustive check: it is one of the minimal paths
    paths = all_simple_paths(world, "n0", "n3")
    best = min(length for length, _ in paths)
    minimal = {p for length, p in paths if length == pytest.approx(best)}
    assert tuple(shortest_path(world, "n0", "n3")) in minimal


def test_advance_pose_linear():
    traj = Trajectory(((0.0, 0.0), (2.0, 0.0)))
    pose, fraction = advance_pose(Pose(0.0, 0.0, 0.0), traj, speed=1.0, dt=0.5)
    assert (pose.x, pose.y) == (0.5, 0.0)
    assert pose.heading == 0.0
    assert fraction == pytest.approx(0.25)


def test_advance_pose_clamps_at_end():
    traj = Trajectory(((0.0, 0.0), (2.0, 0.0)))
    pose, fraction = advance_pose(Pose(1.5, 0.0, 0.0), traj, speed=1.0, dt=10.0)
    assert (pose.x, pose.y) == (2.0, 0.0)
    assert fraction == 1.0


def test_advance_pose_multi_segment():
    traj = Trajectory(((0.0, 0.0), (2.0, 0.0), (4.0, 0.0), (6.0, 0.0)))
    pose = Pose(0.0, 0.0, 0.0)
    total = 0.0
    for _ in range(6):  # 6 * 0.5 s at 1 m/s = 3 m
        pose, fraction = advance_pose(pose, traj, speed=1.0, dt=0.5)
    assert (pose.x, pose.y) == (3.0, 0.0)
    assert fraction == pytest.approx(0.5)


def test_advance_pose_additive():
    rng = random.Random(3)
    traj = Trajectory(((0.0, 0.0), (1.0, 1.0), (3.0, 1.0), (3.0, 4.0)))
    for _ in range(25):
        dt = rng.uniform(0.05, 0.4)
        speed = rng.uniform(0.2, 1.5)
        one, _ = advance_pose(*advance_pose(Pose(0.0, 0.0), traj, speed, dt)[:1],
                              trajectory=traj, speed=speed, dt=dt)
        two, _ = advance_pose(Pose(0.0, 0.0), traj, speed, 2 * dt)
        assert math.hypot(one.x - two.x, one.y - two.y) < 1e-9


def test_advance_pose_off_polyline_raises():
    traj = Trajectory(((0.0, 0.0), (2.0, 0.0)))
    with pytest.raises(TrackingError):
        advance_pose(Pose(1.0, 0.5, 0.0), traj, speed=1.0, dt=0.1)


def test_single_point_trajectory_fraction_one():
    traj = Trajectory(((1.0, 1.0),))
    pose, fraction = advance_pose(Pose(1.0, 1.0, 0.3), traj, speed=1.0, dt=0.5)
    assert fraction == 1.0
    assert (pose.x, pose.y) == (1.0, 1.0)

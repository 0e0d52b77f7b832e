from __future__ import annotations

import json
import math
import random
from importlib import resources

import pytest

from arnsim.world import load_world


@pytest.fixture(scope="session")
def office3_doc():
    text = resources.files("arnsim").joinpath("scenarios/office3.json").read_text()
    return json.loads(text)


@pytest.fixture(scope="session")
def office3(office3_doc):
    return load_world(office3_doc, name="office3")


@pytest.fixture(scope="session")
def office3_world(office3):
    return office3.world


def random_world_doc(rng: random.Random, *, max_nodes: int = 8, max_doors: int = 1,
                     n_loading: int = 2) -> dict:
    """Connected random scenario document: spanning tree plus a few extra edges,
    Euclidean lengths, optional assisted door, loading stations and one base."""
    n = rng.randint(3, max_nodes)
    nodes = []
    taken = set()
    for i in range(n):
        while True:
            x, y = rng.randint(0, 9), rng.randint(0, 9)
            if (x, y) not in taken:
                taken.add((x, y))
                break
        nodes.append({"id": f"n{i}", "x": float(x), "y": float(y)})

    edges = []
    pairs = set()
    ids = [node["id"] for node in nodes]
    for i in range(1, n):
        j = rng.randrange(i)
        edges.append({"from": ids[j], "to": ids[i]})
        pairs.add((min(ids[j], ids[i]), max(ids[j], ids[i])))
    for _ in range(rng.randint(0, n // 2)):
        a, b = rng.sample(ids, 2)
        key = (min(a, b), max(a, b))
        if key not in pairs:
            pairs.add(key)
            edges.append({"from": a, "to": b})

    doors = []
    n_doors = rng.randint(0, max_doors)
    door_edges = rng.sample(range(len(edges)), min(n_doors, len(edges)))
    for k, edge_idx in enumerate(door_edges):
        door_id = f"door{k}"
        doors.append({"id": door_id, "assisted": rng.random() < 0.8})
        edges[edge_idx]["door"] = door_id

    station_nodes = rng.sample(ids, min(n_loading + 1, n))
    stations = [{"id": f"S{i}", "node": node, "kind": "loading"}
                for i, node in enumerate(station_nodes[:-1])]
    stations.append({"id": "BASE", "node": station_nodes[-1], "kind": "base"})

    return {
        "map": {"nodes": nodes, "edges": edges, "doors": doors, "stations": stations},
        "robots": [{"id": 0, "start_node": rng.choice(ids)}],
        "tasks": [],
    }

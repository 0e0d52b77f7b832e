"""World model: waypoint map, doors, stations, robots, tasks, and the symbolic state."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

NODE_SNAP_M = 0.25
FACING_TOLERANCE_RAD = math.pi / 4
EDGE_LENGTH_TOLERANCE_M = 1e-6
DEFAULT_SPEED_MPS = 0.6
DEFAULT_CAPACITY = 1
DEFAULT_AUTO_CLOSE_S = 15.0

STATION_KINDS = ("loading", "base")
DOOR_STATES = ("open", "closed")


class ScenarioError(ValueError):
    """Scenario document rejected; `path` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class ProjectionError(ValueError):
    """Robot pose cannot be projected onto a map node."""


def normalize_heading(theta: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped < 0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", normalize_heading(self.heading))


@dataclass(frozen=True)
class Node:
    node_id: str
    x: float
    y: float


@dataclass(frozen=True)
class Edge:
    a: str
    b: str
    length: float
    door_id: str | None = None

    def other(self, node_id: str) -> str:
        return self.b if node_id == self.a else self.a


@dataclass(frozen=True)
class Door:
    door_id: str
    assisted: bool = True
    auto_close_after_s: float = DEFAULT_AUTO_CLOSE_S
    state: str = "closed"  # initial state; runtime state lives in the engine


@dataclass(frozen=True)
class Station:
    station_id: str
    node_id: str
    kind: str  # "loading" | "base"


@dataclass(frozen=True)
class Delivery:
    object_id: str
    pickup_station: str
    dropoff_station: str


@dataclass(frozen=True)
class TaskSpec:
    robot_id: int
    deliveries: tuple[Delivery, ...] = ()


@dataclass(frozen=True)
class RobotSpec:
    robot_id: int
    start_node: str
    speed_mps: float = DEFAULT_SPEED_MPS
    capacity: int = DEFAULT_CAPACITY


@dataclass
class RobotState:
    """Runtime robot state owned by the engine."""

    robot_id: int
    pose: Pose
    carried: set[str] = field(default_factory=set)
    symbolic_location: str | None = None
    status: str = "idle"  # idle | moving | waiting-at-door | done


@dataclass(frozen=True)
class SymbolicState:
    """Discrete planning state for a single robot.

    `object_locations` maps object id to a station id, the literal "robot"
    (carried by this robot), or the literal "base" (delivered).
    """

    robot_location: str
    facing_door: str | None
    door_states: tuple[tuple[str, str], ...]
    object_locations: tuple[tuple[str, str], ...]
    step_index: int = 0

    def object_location(self, object_id: str) -> str | None:
        for oid, place in self.object_locations:
            if oid == object_id:
                return place
        return None

    def door_state(self, door_id: str) -> str:
        for did, state in self.door_states:
            if did == door_id:
                return state
        return "closed"


class WorldMap:
    """Validated, immutable waypoint graph with doors and stations."""

    def __init__(self, nodes: tuple[Node, ...], edges: tuple[Edge, ...],
                 doors: tuple[Door, ...], stations: tuple[Station, ...]):
        self.nodes = nodes
        self.edges = edges
        self.doors = doors
        self.stations = stations
        self._node_by_id = {n.node_id: n for n in nodes}
        self._door_by_id = {d.door_id: d for d in doors}
        self._station_by_id = {s.station_id: s for s in stations}
        self._adjacency: dict[str, list[Edge]] = {n.node_id: [] for n in nodes}
        for e in edges:
            self._adjacency[e.a].append(e)
            self._adjacency[e.b].append(e)
        self._door_edge = {e.door_id: e for e in edges if e.door_id is not None}

    def node(self, node_id: str) -> Node:
        return self._node_by_id[node_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._node_by_id

    def coords(self, node_id: str) -> tuple[float, float]:
        n = self._node_by_id[node_id]
        return (n.x, n.y)

    def door(self, door_id: str) -> Door:
        return self._door_by_id[door_id]

    def has_door(self, door_id: str) -> bool:
        return door_id in self._door_by_id

    def door_edge(self, door_id: str) -> Edge:
        return self._door_edge[door_id]

    def station(self, station_id: str) -> Station:
        return self._station_by_id[station_id]

    def has_station(self, station_id: str) -> bool:
        return station_id in self._station_by_id

    def base_station(self) -> Station:
        return next(s for s in self.stations if s.kind == "base")

    def edges_at(self, node_id: str) -> list[Edge]:
        return self._adjacency[node_id]

    def doors_at(self, node_id: str) -> list[Door]:
        """Doors whose edge has `node_id` as an endpoint, sorted by id."""
        found = [self._door_by_id[e.door_id]
                 for e in self._adjacency[node_id] if e.door_id is not None]
        return sorted(found, key=lambda d: d.door_id)

    def initial_door_states(self) -> dict[str, str]:
        return {d.door_id: d.state for d in self.doors}


@dataclass(frozen=True)
class HumanCosts:
    tilt_s: float = 2.0
    feedback_s: float = 2.0
    open_door_s: float = 10.0
    focus_recovery_s: float = 60.0


@dataclass(frozen=True)
class HumanParams:
    own_task_mean_s: float = 840.0
    own_task_sd_s: float = 120.0
    feedback_time_fraction: float = 0.3
    feedback_time_sd_s: float = 60.0
    tilt_rate: float = 0.05
    costs: HumanCosts = HumanCosts()


@dataclass(frozen=True)
class Scenario:
    world: WorldMap
    robots: tuple[RobotSpec, ...]
    tasks: tuple[TaskSpec, ...]
    human: HumanParams
    name: str = "scenario"

    @property
    def n_robots(self) -> int:
        return len(self.robots)

    def task_for(self, robot_id: int) -> TaskSpec:
        for t in self.tasks:
            if t.robot_id == robot_id:
                return t
        return TaskSpec(robot_id=robot_id)

    def initial_object_locations(self) -> dict[str, str]:
        placements = {}
        for task in self.tasks:
            for d in task.deliveries:
                placements[d.object_id] = d.pickup_station
        return placements


def _expect_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(path, f"expected an object, got {type(value).__name__}")
    return value


def _expect_list(value, path: str) -> list:
    if not isinstance(value, list):
        raise ScenarioError(path, f"expected an array, got {type(value).__name__}")
    return value


def _check_keys(obj: dict, path: str, required: tuple[str, ...], optional: tuple[str, ...] = ()):
    for key in required:
        if key not in obj:
            raise ScenarioError(path, f"missing required key '{key}'")
    allowed = set(required) | set(optional)
    for key in obj:
        if key not in allowed:
            raise ScenarioError(f"{path}.{key}", "unknown key")


def _number(obj: dict, key: str, path: str, *, minimum: float | None = None,
            exclusive: bool = False, default=None) -> float:
    if key not in obj:
        if default is not None:
            return default
        raise ScenarioError(path, f"missing required key '{key}'")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}.{key}", "expected a number")
    value = float(value)
    if minimum is not None:
        if exclusive and value <= minimum:
            raise ScenarioError(f"{path}.{key}", f"must be > {minimum}")
        if not exclusive and value < minimum:
            raise ScenarioError(f"{path}.{key}", f"must be >= {minimum}")
    return value


def _string(obj: dict, key: str, path: str) -> str:
    if key not in obj:
        raise ScenarioError(path, f"missing required key '{key}'")
    value = obj[key]
    if not isinstance(value, str) or not value:
        raise ScenarioError(f"{path}.{key}", "expected a non-empty string")
    return value


def _load_map(doc: dict) -> WorldMap:
    map_doc = _expect_mapping(doc, "map")
    _check_keys(map_doc, "map", ("nodes", "edges", "stations"), ("doors",))

    nodes: list[Node] = []
    seen_nodes: set[str] = set()
    for i, entry in enumerate(_expect_list(map_doc["nodes"], "map.nodes")):
        path = f"map.nodes[{i}]"
        entry = _expect_mapping(entry, path)
        _check_keys(entry, path, ("id", "x", "y"))
        node_id = _string(entry, "id", path)
        if node_id in seen_nodes:
            raise ScenarioError(f"{path}.id", f"duplicate node id '{node_id}'")
        seen_nodes.add(node_id)
        nodes.append(Node(node_id, _number(entry, "x", path), _number(entry, "y", path)))
    if not nodes:
        raise ScenarioError("map.nodes", "at least one node required")
    node_by_id = {n.node_id: n for n in nodes}

    doors: list[Door] = []
    seen_doors: set[str] = set()
    for i, entry in enumerate(_expect_list(map_doc.get("doors", []), "map.doors")):
        path = f"map.doors[{i}]"
        entry = _expect_mapping(entry, path)
        _check_keys(entry, path, ("id",), ("assisted", "auto_close_after_s", "state"))
        door_id = _string(entry, "id", path)
        if door_id in seen_doors:
            raise ScenarioError(f"{path}.id", f"duplicate door id '{door_id}'")
        seen_doors.add(door_id)
        assisted = entry.get("assisted", True)
        if not isinstance(assisted, bool):
            raise ScenarioError(f"{path}.assisted", "expected a boolean")
        state = entry.get("state", "closed")
        if state not in DOOR_STATES:
            raise ScenarioError(f"{path}.state", f"expected one of {DOOR_STATES}")
        doors.append(Door(
            door_id=door_id,
            assisted=assisted,
            auto_close_after_s=_number(entry, "auto_close_after_s", path,
                                       minimum=0.0, exclusive=True,
                                       default=DEFAULT_AUTO_CLOSE_S),
            state=state,
        ))

    edges: list[Edge] = []
    seen_pairs: set[tuple[str, str]] = set()
    doors_used: set[str] = set()
    for i, entry in enumerate(_expect_list(map_doc["edges"], "map.edges")):
        path = f"map.edges[{i}]"
        entry = _expect_mapping(entry, path)
        _check_keys(entry, path, ("from", "to"), ("length", "door"))
        a = _string(entry, "from", path)
        b = _string(entry, "to", path)
        for key, node_id in (("from", a), ("to", b)):
            if node_id not in node_by_id:
                raise ScenarioError(f"{path}.{key}", f"unknown node '{node_id}'")
        if a == b:
            raise ScenarioError(path, "edge endpoints must differ")
        pair = (min(a, b), max(a, b))
        if pair in seen_pairs:
            raise ScenarioError(path, f"duplicate edge between '{a}' and '{b}'")
        seen_pairs.add(pair)
        na, nb = node_by_id[a], node_by_id[b]
        euclid = math.hypot(na.x - nb.x, na.y - nb.y)
        length = _number(entry, "length", path, minimum=0.0, exclusive=True, default=euclid)
        if abs(length - euclid) > EDGE_LENGTH_TOLERANCE_M:
            raise ScenarioError(f"{path}.length",
                                f"length {length} differs from endpoint distance {euclid:.9f}")
        door_id = None
        if "door" in entry:
            door_id = _string(entry, "door", path)
            if door_id not in seen_doors:
                raise ScenarioError(f"{path}.door", f"unknown door '{door_id}'")
            if door_id in doors_used:
                raise ScenarioError(f"{path}.door", f"door '{door_id}' used by more than one edge")
            doors_used.add(door_id)
        edges.append(Edge(a, b, length, door_id))

    for i, door in enumerate(doors):
        if door.door_id not in doors_used:
            raise ScenarioError(f"map.doors[{i}].id",
                                f"door '{door.door_id}' is not referenced by any edge")

    stations: list[Station] = []
    seen_stations: set[str] = set()
    base_count = 0
    for i, entry in enumerate(_expect_list(map_doc["stations"], "map.stations")):
        path = f"map.stations[{i}]"
        entry = _expect_mapping(entry, path)
        _check_keys(entry, path, ("id", "node", "kind"))
        station_id = _string(entry, "id", path)
        if station_id in seen_stations:
            raise ScenarioError(f"{path}.id", f"duplicate station id '{station_id}'")
        seen_stations.add(station_id)
        node_id = _string(entry, "node", path)
        if node_id not in node_by_id:
            raise ScenarioError(f"{path}.node", f"unknown node '{node_id}'")
        kind = _string(entry, "kind", path)
        if kind not in STATION_KINDS:
            raise ScenarioError(f"{path}.kind", f"expected one of {STATION_KINDS}")
        if kind == "base":
            base_count += 1
        stations.append(Station(station_id, node_id, kind))
    if base_count != 1:
        raise ScenarioError("map.stations", f"expected exactly one base station, found {base_count}")

    # Connectivity: every node reachable from every other (undirected flood fill).
    reached = {nodes[0].node_id}
    frontier = [nodes[0].node_id]
    adjacency: dict[str, list[str]] = {n.node_id: [] for n in nodes}
    for e in edges:
        adjacency[e.a].append(e.b)
        adjacency[e.b].append(e.a)
    while frontier:
        current = frontier.pop()
        for neighbor in adjacency[current]:
            if neighbor not in reached:
                reached.add(neighbor)
                frontier.append(neighbor)
    if len(reached) != len(nodes):
        missing = sorted(set(node_by_id) - reached)
        raise ScenarioError("map", f"graph is not connected; unreachable nodes: {missing}")

    return WorldMap(tuple(nodes), tuple(edges), tuple(doors), tuple(stations))


def _load_human(doc) -> HumanParams:
    defaults = HumanParams()
    if doc is None:
        return defaults
    human = _expect_mapping(doc, "human")
    _check_keys(human, "human", (),
                ("own_task_mean_s", "own_task_sd_s", "feedback_time_fraction",
                 "feedback_time_sd_s", "tilt_rate", "action_costs"))
    costs = HumanCosts()
    if "action_costs" in human:
        cost_doc = _expect_mapping(human["action_costs"], "human.action_costs")
        _check_keys(cost_doc, "human.action_costs", (),
                    ("tilt_s", "feedback_s", "open_door_s", "focus_recovery_s"))
        costs = HumanCosts(
            tilt_s=_number(cost_doc, "tilt_s", "human.action_costs",
                           minimum=0.0, exclusive=True, default=costs.tilt_s),
            feedback_s=_number(cost_doc, "feedback_s", "human.action_costs",
                               minimum=0.0, exclusive=True, default=costs.feedback_s),
            open_door_s=_number(cost_doc, "open_door_s", "human.action_costs",
                                minimum=0.0, exclusive=True, default=costs.open_door_s),
            focus_recovery_s=_number(cost_doc, "focus_recovery_s", "human.action_costs",
                                     minimum=0.0, default=costs.focus_recovery_s),
        )
    return HumanParams(
        own_task_mean_s=_number(human, "own_task_mean_s", "human",
                                minimum=0.0, exclusive=True, default=defaults.own_task_mean_s),
        own_task_sd_s=_number(human, "own_task_sd_s", "human",
                              minimum=0.0, default=defaults.own_task_sd_s),
        feedback_time_fraction=_number(human, "feedback_time_fraction", "human",
                                       minimum=0.0, default=defaults.feedback_time_fraction),
        feedback_time_sd_s=_number(human, "feedback_time_sd_s", "human",
                                   minimum=0.0, default=defaults.feedback_time_sd_s),
        tilt_rate=_number(human, "tilt_rate", "human",
                          minimum=0.0, default=defaults.tilt_rate),
        costs=costs,
    )


def load_world(doc: dict, name: str = "scenario") -> Scenario:
    """Validate a scenario document and build the immutable Scenario.

    Raises ScenarioError naming the offending field path on any violation:
    unknown keys, dangling references, non-Euclidean edge lengths, or a
    disconnected graph.
    """
    doc = _expect_mapping(doc, "$")
    _check_keys(doc, "$", ("map", "robots", "tasks"), ("human", "name"))
    world = _load_map(doc["map"])

    robots: list[RobotSpec] = []
    for i, entry in enumerate(_expect_list(doc["robots"], "robots")):
        path = f"robots[{i}]"
        entry = _expect_mapping(entry, path)
        _check_keys(entry, path, ("id", "start_node"), ("speed_mps", "capacity"))
        robot_id = entry["id"]
        if isinstance(robot_id, bool) or not isinstance(robot_id, int):
            raise ScenarioError(f"{path}.id", "expected an integer")
        start = _string(entry, "start_node", path)
        if not world.has_node(start):
            raise ScenarioError(f"{path}.start_node", f"unknown node '{start}'")
        capacity = entry.get("capacity", DEFAULT_CAPACITY)
        if isinstance(capacity, bool) or not isinstance(capacity, int) or capacity < 1:
            raise ScenarioError(f"{path}.capacity", "expected an integer >= 1")
        robots.append(RobotSpec(
            robot_id=robot_id,
            start_node=start,
            speed_mps=_number(entry, "speed_mps", path, minimum=0.0, exclusive=True,
                              default=DEFAULT_SPEED_MPS),
            capacity=capacity,
        ))
    robots.sort(key=lambda r: r.robot_id)
    expected_ids = list(range(len(robots)))
    if [r.robot_id for r in robots] != expected_ids:
        raise ScenarioError("robots", f"robot ids must be exactly 0..{len(robots) - 1}")

    tasks: list[TaskSpec] = []
    seen_task_robots: set[int] = set()
    seen_objects: set[str] = set()
    for i, entry in enumerate(_expect_list(doc["tasks"], "tasks")):
        path = f"tasks[{i}]"
        entry = _expect_mapping(entry, path)
        _check_keys(entry, path, ("robot", "deliveries"))
        robot_id = entry["robot"]
        if isinstance(robot_id, bool) or not isinstance(robot_id, int) or not (0 <= robot_id < len(robots)):
            raise ScenarioError(f"{path}.robot", f"unknown robot id {robot_id!r}")
        if robot_id in seen_task_robots:
            raise ScenarioError(f"{path}.robot", f"duplicate task list for robot {robot_id}")
        seen_task_robots.add(robot_id)
        deliveries: list[Delivery] = []
        for j, d in enumerate(_expect_list(entry["deliveries"], f"{path}.deliveries")):
            dpath = f"{path}.deliveries[{j}]"
            d = _expect_mapping(d, dpath)
            _check_keys(d, dpath, ("object", "pickup", "dropoff"))
            object_id = _string(d, "object", dpath)
            if object_id in seen_objects:
                raise ScenarioError(f"{dpath}.object", f"duplicate object id '{object_id}'")
            seen_objects.add(object_id)
            pickup = _string(d, "pickup", dpath)
            dropoff = _string(d, "dropoff", dpath)
            if not world.has_station(pickup):
                raise ScenarioError(f"{dpath}.pickup", f"unknown station '{pickup}'")
            if not world.has_station(dropoff):
                raise ScenarioError(f"{dpath}.dropoff", f"unknown station '{dropoff}'")
            if world.station(pickup).kind != "loading":
                raise ScenarioError(f"{dpath}.pickup", f"station '{pickup}' is not a loading station")
            if world.station(dropoff).kind != "base":
                raise ScenarioError(f"{dpath}.dropoff", f"station '{dropoff}' is not the base station")
            deliveries.append(Delivery(object_id, pickup, dropoff))
        tasks.append(TaskSpec(robot_id, tuple(deliveries)))

    return Scenario(
        world=world,
        robots=tuple(robots),
        tasks=tuple(sorted(tasks, key=lambda t: t.robot_id)),
        human=_load_human(doc.get("human")),
        name=doc.get("name", name),
    )


def world_to_document(scenario: Scenario) -> dict:
    """Serialize a scenario back to its document form (round-trips through load_world)."""
    world = scenario.world
    doc: dict = {
        "name": scenario.name,
        "map": {
            "nodes": [{"id": n.node_id, "x": n.x, "y": n.y} for n in world.nodes],
            "edges": [
                {"from": e.a, "to": e.b, "length": e.length,
                 **({"door": e.door_id} if e.door_id else {})}
                for e in world.edges
            ],
            "doors": [
                {"id": d.door_id, "assisted": d.assisted,
                 "auto_close_after_s": d.auto_close_after_s, "state": d.state}
                for d in world.doors
            ],
            "stations": [{"id": s.station_id, "node": s.node_id, "kind": s.kind}
                         for s in world.stations],
        },
        "robots": [
            {"id": r.robot_id, "start_node": r.start_node,
             "speed_mps": r.speed_mps, "capacity": r.capacity}
            for r in scenario.robots
        ],
        "tasks": [
            {"robot": t.robot_id,
             "deliveries": [{"object": d.object_id, "pickup": d.pickup_station,
                             "dropoff": d.dropoff_station} for d in t.deliveries]}
            for t in scenario.tasks
        ],
        "human": {
            "own_task_mean_s": scenario.human.own_task_mean_s,
            "own_task_sd_s": scenario.human.own_task_sd_s,
            "feedback_time_fraction": scenario.human.feedback_time_fraction,
            "feedback_time_sd_s": scenario.human.feedback_time_sd_s,
            "tilt_rate": scenario.human.tilt_rate,
            "action_costs": {
                "tilt_s": scenario.human.costs.tilt_s,
                "feedback_s": scenario.human.costs.feedback_s,
                "open_door_s": scenario.human.costs.open_door_s,
                "focus_recovery_s": scenario.human.costs.focus_recovery_s,
            },
        },
    }
    return doc


def nearest_node(world: WorldMap, x: float, y: float) -> tuple[str, float]:
    """Closest node id and its distance; ties broken by node id."""
    best_id, best_dist = None, math.inf
    for node in world.nodes:
        dist = math.hypot(node.x - x, node.y - y)
        if dist < best_dist - 1e-12 or (abs(dist - best_dist) <= 1e-12
                                        and (best_id is None or node.node_id < best_id)):
            best_id, best_dist = node.node_id, dist
    return best_id, best_dist


def symbolic_state(world: WorldMap, robot_state: RobotState,
                   object_locations: dict[str, str],
                   door_states: dict[str, str] | None = None) -> SymbolicState:
    """Project a metric robot state onto the discrete planning state.

    The robot must not be moving and must sit within NODE_SNAP_M of a node.
    A door is "faced" when the robot stands at one of its edge endpoints with
    its heading within FACING_TOLERANCE_RAD of the direction along that edge.
    """
    if robot_state.status == "moving":
        raise ProjectionError(f"robot {robot_state.robot_id} is moving")
    node_id, dist = nearest_node(world, robot_state.pose.x, robot_state.pose.y)
    if dist > NODE_SNAP_M:
        raise ProjectionError(
            f"robot {robot_state.robot_id} at ({robot_state.pose.x:.3f}, {robot_state.pose.y:.3f}) "
            f"is {dist:.3f} m from nearest node '{node_id}' (> {NODE_SNAP_M} m)")

    facing: str | None = None
    best_angle = FACING_TOLERANCE_RAD
    for door in world.doors_at(node_id):
        edge = world.door_edge(door.door_id)
        ox, oy = world.coords(edge.other(node_id))
        nx, ny = world.coords(node_id)
        toward = math.atan2(oy - ny, ox - nx)
        angle = abs(normalize_heading(robot_state.pose.heading - toward))
        if angle <= best_angle:
            facing = door.door_id
            best_angle = angle

    if door_states is None:
        door_states = world.initial_door_states()
    resolved = {}
    for object_id, place in object_locations.items():
        if place == f"robot:{robot_state.robot_id}" or object_id in robot_state.carried:
            resolved[object_id] = "robot"
        else:
            resolved[object_id] = place
    return SymbolicState(
        robot_location=node_id,
        facing_door=facing,
        door_states=tuple(sorted(door_states.items())),
        object_locations=tuple(sorted(resolved.items())),
    )

"""arnsim: human-multi-robot collaborative delivery simulation and planning."""

from .world import (Delivery, Door, HumanCosts, HumanParams, Node, Pose, ProjectionError,
                    RobotSpec, RobotState, Scenario, ScenarioError, Station, SymbolicState,
                    TaskSpec, WorldMap, load_world, symbolic_state, world_to_document)
from .motion import (RoutingError, TrackingError, Trajectory, advance_pose, route,
                     shortest_path)
from .planner import (Action, AssistUnavailable, ConstraintSet, Plan, PlanSet, PlannerCosts,
                      PlanningError, ResidualGoal, DEFAULT_COSTS, estimate_completion,
                      plan_single, plan_team)

__version__ = "0.1.0"

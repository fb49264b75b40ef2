"""swarmsafe: safety-filtered density control for robot swarms.

A swarm is modeled as a sum of Gaussian density bumps on a periodic grid.
Each robot runs a small quadratic program that trades tracking a target
density profile against a hard cap on how much swarm density may sit inside
user-defined danger regions, using only what its communication neighbors
expose. The :mod:`swarmsafe.sim` module closes the loop; the
:mod:`swarmsafe.metrics` module re-checks the safety bounds offline.
"""

from .controller import (CentralizedDecision, ControlDecision, ControllerParams,
                         centralized_control, decide)
from .errors import (ControllerError, DimensionError, InfeasibleProblem,
                     ParameterError, ScenarioError, SwarmSafeError)
from .fields import GaussianShape, robot_density, sum_densities, target_density
from .graph import NeighborSet, delta_disk
from .grid import (Grid, Operators, RegionMask, build_operators, integrate,
                   integrate_region)
from .metrics import (BoundCheck, StepMetrics, global_metrics,
                      verify_individual_bounds, verify_neighbor_proximity,
                      verify_swarm_bound)
from .qp import QPProblem, QPSolution, solve
from .sim import (RunResult, Scenario, Simulation, bundled_scenario_names,
                  load_scenario, parse_scenario, scenario_from_dict)

__version__ = "0.1.0"

__all__ = [
    "BoundCheck", "CentralizedDecision", "ControlDecision", "ControllerError",
    "ControllerParams", "DimensionError", "GaussianShape", "Grid",
    "InfeasibleProblem", "NeighborSet", "Operators", "ParameterError",
    "QPProblem", "QPSolution", "RegionMask", "RunResult", "Scenario",
    "ScenarioError", "Simulation", "StepMetrics", "SwarmSafeError",
    "build_operators", "bundled_scenario_names", "centralized_control",
    "decide", "delta_disk", "global_metrics", "integrate", "integrate_region",
    "load_scenario", "parse_scenario", "robot_density", "scenario_from_dict",
    "solve", "sum_densities", "target_density", "verify_individual_bounds",
    "verify_neighbor_proximity", "verify_swarm_bound", "__version__",
]

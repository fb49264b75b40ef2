"""Scenario files and the closed-loop swarm simulation.

A scenario is a JSON document (conventionally ``*.scenario``) that fixes the
arena, the robots and their density footprint, the target profile, the danger
regions, communication and collision radii, controller gains, noise levels,
and the run length. :func:`load_scenario` accepts either a filesystem path or
the name of a scenario bundled with the package.

The simulation separates two universes on purpose:

* the *decision* universe — measured positions (true + localization noise),
  the neighbor graph built from them, and the density fields the controllers
  believe in;
* the *verification* universe — true positions and the velocities actually
  applied, in which every logged metric and safety bound is evaluated.

Per step: measure, build the graph, decide (all robots against the same
frozen snapshot), stop collision pairs, log metrics, then move the robots
with optional process noise and wrap around the torus.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .controller import ControllerParams, centralized_control, decide
from .errors import ControllerError, InfeasibleProblem, ParameterError, ScenarioError
from .fields import GaussianShape, robot_density, target_density
from .graph import delta_disk
from .grid import Grid, Operators, RegionMask, build_operators
from .metrics import (StepMetrics, global_metrics, local_values,
                      verify_individual_bounds, verify_neighbor_proximity,
                      verify_swarm_bound)

# The centralized baseline solves one QP over all velocities plus a slack;
# its size is what bounds the supported swarm size.
MAX_ROBOTS = 31

SIMULATION_MODES = ("decentralized", "centralized")


# ----------------------------------------------------------------------
# danger-region primitives
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CircleRegion:
    center: tuple[float, float]
    radius: float

    def rasterize(self, grid: Grid) -> RegionMask:
        return RegionMask.from_circle(grid, self.center, self.radius)


@dataclass(frozen=True)
class BoxRegion:
    lo: tuple[float, float]
    hi: tuple[float, float]

    def rasterize(self, grid: Grid) -> RegionMask:
        return RegionMask.from_box(grid, self.lo, self.hi)


@dataclass(frozen=True)
class CellsRegion:
    indices: tuple[int, ...]

    def rasterize(self, grid: Grid) -> RegionMask:
        bad = [k for k in self.indices if not 0 <= k < grid.n_cells]
        if bad:
            raise ScenarioError(
                f"danger cell index {bad[0]} out of range for a grid of "
                f"{grid.n_cells} cells"
            )
        return RegionMask(np.asarray(self.indices, dtype=np.int64))


# ----------------------------------------------------------------------
# initial placement
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ExplicitPlacement:
    positions: tuple[tuple[float, float], ...]

    def sample(self, grid: Grid, n_robots, seed) -> np.ndarray:
        if len(self.positions) != n_robots:
            raise ScenarioError(
                f"{len(self.positions)} explicit positions given for "
                f"{n_robots} robots"
            )
        return np.array([grid.wrap_point(p) for p in self.positions])


@dataclass(frozen=True)
class ScatterPlacement:
    """Gaussian scatter around a center with torus min-separation rejection."""

    center: tuple[float, float]
    spread: float
    min_separation: float = 0.0
    max_attempts: int = 10_000

    def sample(self, grid: Grid, n_robots, seed) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
        placed: list[np.ndarray] = []
        attempts = 0
        while len(placed) < n_robots:
            if attempts >= self.max_attempts:
                raise ScenarioError(
                    f"could not scatter {n_robots} robots with separation "
                    f">= {self.min_separation} in {self.max_attempts} attempts"
                )
            attempts += 1
            p = grid.wrap_point(np.asarray(self.center) +
                                self.spread * rng.standard_normal(2))
            if all(grid.torus_distance(p, q) >= self.min_separation for q in placed):
                placed.append(p)
        return np.array(placed)


# ----------------------------------------------------------------------
# scenario
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Scenario:
    """A fully validated run configuration."""

    name: str
    description: str
    arena: tuple[float, float]
    cell: float
    n_robots: int
    robot_shape: GaussianShape
    placement: ExplicitPlacement | ScatterPlacement
    target_center: tuple[float, float]
    target_shape: GaussianShape
    target_mass_scale: float
    danger_regions: tuple[CircleRegion | BoxRegion | CellsRegion, ...]
    comm_radius: float
    collision_radius: float          # 0 disables the collision stop
    u_max: float
    safety_threshold: float
    clf_gain: float
    cbf_gain: float
    cbf_gain_global: float | None
    slack_penalty: float
    diffusion: float | None
    motion_noise: float              # diffusion coefficient of the true motion
    localization_noise: float        # std of the position measurement error
    dt: float
    steps: int
    seed: int

    def build_grid(self) -> Grid:
        lx, ly = self.arena
        nx = round(lx / self.cell)
        ny = round(ly / self.cell)
        for label, size, count in (("arena.size[0]", lx, nx), ("arena.size[1]", ly, ny)):
            if count < 3 or abs(count * self.cell - size) > 1e-9 * max(1.0, size):
                raise ScenarioError(
                    f"{label} = {size} is not a whole number (>= 3) of "
                    f"{self.cell}-sized cells"
                )
        origin = (-0.5 * lx + 0.5 * self.cell, -0.5 * ly + 0.5 * self.cell)
        return Grid(nx=nx, ny=ny, cell=self.cell, origin=origin)

    def danger_mask(self, grid: Grid) -> RegionMask:
        return RegionMask.union([r.rasterize(grid) for r in self.danger_regions])

    def controller_params(self) -> ControllerParams:
        return ControllerParams(
            n_robots=self.n_robots,
            u_max=self.u_max,
            safety_threshold=self.safety_threshold,
            clf_gain=self.clf_gain,
            cbf_gain=self.cbf_gain,
            slack_penalty=self.slack_penalty,
            diffusion=self.diffusion,
            cbf_gain_global=self.cbf_gain_global,
        )

    def target_field(self, grid: Grid) -> np.ndarray:
        return target_density(grid, self.target_center, self.target_shape,
                              self.n_robots, self.robot_shape,
                              mass_scale=self.target_mass_scale)

    def initial_positions(self, grid: Grid, seed) -> np.ndarray:
        return self.placement.sample(grid, self.n_robots, seed)


# ----------------------------------------------------------------------
# parsing and validation
# ----------------------------------------------------------------------
def _check_keys(mapping, allowed, path):
    if not isinstance(mapping, dict):
        raise ScenarioError(f"{path} must be an object")
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ScenarioError(
            f"unknown key {path}.{unknown[0]} (expected one of: "
            f"{', '.join(sorted(allowed))})"
        )


_MISSING = object()


def _get(mapping, key, path, default=_MISSING):
    if key in mapping:
        return mapping[key]
    if default is _MISSING:
        raise ScenarioError(f"missing required key {path}.{key}")
    return default


def _as_number(value, path, *, minimum=None, exclusive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path} must be a number, got {value!r}")
    x = float(value)
    if not np.isfinite(x):
        raise ScenarioError(f"{path} must be finite")
    if minimum is not None:
        if exclusive and not x > minimum:
            raise ScenarioError(f"{path} must be > {minimum}, got {value!r}")
        if not exclusive and not x >= minimum:
            raise ScenarioError(f"{path} must be >= {minimum}, got {value!r}")
    return x


def _as_int(value, path, *, minimum=None, maximum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{path} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ScenarioError(f"{path} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ScenarioError(f"{path} must be <= {maximum}, got {value}")
    return int(value)


def _as_pair(value, path):
    if (not isinstance(value, (list, tuple)) or len(value) != 2):
        raise ScenarioError(f"{path} must be a pair [x, y]")
    return (_as_number(value[0], f"{path}[0]"), _as_number(value[1], f"{path}[1]"))


def _as_shape(value, path) -> GaussianShape:
    _check_keys(value, {"precision"}, path)
    prec = _get(value, "precision", path)
    if isinstance(value, dict) and isinstance(prec, (list, tuple)):
        if len(prec) != 2 or any(not isinstance(r, (list, tuple)) or len(r) != 2
                                 for r in prec):
            raise ScenarioError(f"{path}.precision must be a scalar or a 2x2 matrix")
        flat = [_as_number(x, f"{path}.precision") for row in prec for x in row]
        try:
            return GaussianShape.from_matrix(np.array(flat).reshape(2, 2))
        except ParameterError as exc:
            raise ScenarioError(f"{path}.precision: {exc}") from exc
    try:
        return GaussianShape.isotropic(_as_number(prec, f"{path}.precision"))
    except ParameterError as exc:
        raise ScenarioError(f"{path}.precision: {exc}") from exc


def _parse_region(value, path):
    if not isinstance(value, dict) or "kind" not in value:
        raise ScenarioError(f"{path} must be an object with a 'kind' key")
    kind = value["kind"]
    if kind == "circle":
        _check_keys(value, {"kind", "center", "radius"}, path)
        return CircleRegion(center=_as_pair(_get(value, "center", path), f"{path}.center"),
                            radius=_as_number(_get(value, "radius", path),
                                              f"{path}.radius", minimum=0.0))
    if kind == "box":
        _check_keys(value, {"kind", "min", "max"}, path)
        lo = _as_pair(_get(value, "min", path), f"{path}.min")
        hi = _as_pair(_get(value, "max", path), f"{path}.max")
        if lo[0] > hi[0] or lo[1] > hi[1]:
            raise ScenarioError(f"{path}: min must not exceed max componentwise")
        return BoxRegion(lo=lo, hi=hi)
    if kind == "cells":
        _check_keys(value, {"kind", "indices"}, path)
        idx = _get(value, "indices", path)
        if not isinstance(idx, list) or not idx:
            raise ScenarioError(f"{path}.indices must be a nonempty list of cell indices")
        return CellsRegion(indices=tuple(
            _as_int(k, f"{path}.indices[{n}]", minimum=0) for n, k in enumerate(idx)))
    raise ScenarioError(f"{path}.kind must be 'circle', 'box', or 'cells', got {kind!r}")


def _parse_placement(value, path):
    if not isinstance(value, dict) or "kind" not in value:
        raise ScenarioError(f"{path} must be an object with a 'kind' key")
    kind = value["kind"]
    if kind == "explicit":
        _check_keys(value, {"kind", "positions"}, path)
        pos = _get(value, "positions", path)
        if not isinstance(pos, list) or not pos:
            raise ScenarioError(f"{path}.positions must be a nonempty list of pairs")
        return ExplicitPlacement(positions=tuple(
            _as_pair(p, f"{path}.positions[{n}]") for n, p in enumerate(pos)))
    if kind == "scatter":
        _check_keys(value, {"kind", "center", "spread", "min_separation",
                            "max_attempts"}, path)
        return ScatterPlacement(
            center=_as_pair(_get(value, "center", path), f"{path}.center"),
            spread=_as_number(_get(value, "spread", path), f"{path}.spread",
                              minimum=0.0, exclusive=True),
            min_separation=_as_number(_get(value, "min_separation", path, 0.0),
                                      f"{path}.min_separation", minimum=0.0),
            max_attempts=_as_int(_get(value, "max_attempts", path, 10_000),
                                 f"{path}.max_attempts", minimum=1),
        )
    raise ScenarioError(f"{path}.kind must be 'explicit' or 'scatter', got {kind!r}")


def scenario_from_dict(data, *, source="<dict>") -> Scenario:
    """Validate a parsed scenario document; every error names the bad key."""
    _check_keys(data, {"name", "description", "arena", "robots", "target",
                       "danger", "comm", "control", "noise", "run"}, "scenario")

    name = _get(data, "name", "scenario")
    if not isinstance(name, str) or not name:
        raise ScenarioError("scenario.name must be a nonempty string")
    description = _get(data, "description", "scenario", "")
    if not isinstance(description, str):
        raise ScenarioError("scenario.description must be a string")

    arena = _get(data, "arena", "scenario")
    _check_keys(arena, {"size", "cell"}, "arena")
    size = _as_pair(_get(arena, "size", "arena"), "arena.size")
    if size[0] <= 0 or size[1] <= 0:
        raise ScenarioError("arena.size components must be positive")
    cell = _as_number(_get(arena, "cell", "arena"), "arena.cell",
                      minimum=0.0, exclusive=True)

    robots = _get(data, "robots", "scenario")
    _check_keys(robots, {"count", "shape", "placement"}, "robots")
    count = _as_int(_get(robots, "count", "robots"), "robots.count",
                    minimum=1, maximum=MAX_ROBOTS)
    robot_shape = _as_shape(_get(robots, "shape", "robots"), "robots.shape")
    placement = _parse_placement(_get(robots, "placement", "robots"),
                                 "robots.placement")

    target = _get(data, "target", "scenario")
    _check_keys(target, {"center", "shape", "mass_scale"}, "target")
    target_center = _as_pair(_get(target, "center", "target"), "target.center")
    target_shape = _as_shape(_get(target, "shape", "target"), "target.shape")
    mass_scale = _as_number(_get(target, "mass_scale", "target", 1.0),
                            "target.mass_scale", minimum=0.0, exclusive=True)

    danger = _get(data, "danger", "scenario", {"regions": []})
    _check_keys(danger, {"regions"}, "danger")
    regions_raw = _get(danger, "regions", "danger")
    if not isinstance(regions_raw, list):
        raise ScenarioError("danger.regions must be a list")
    regions = tuple(_parse_region(r, f"danger.regions[{n}]")
                    for n, r in enumerate(regions_raw))

    comm = _get(data, "comm", "scenario")
    _check_keys(comm, {"radius", "collision_radius"}, "comm")
    comm_radius = _as_number(_get(comm, "radius", "comm"), "comm.radius",
                             minimum=0.0, exclusive=True)
    collision_radius = _as_number(_get(comm, "collision_radius", "comm", 0.0),
                                  "comm.collision_radius", minimum=0.0)

    control = _get(data, "control", "scenario")
    _check_keys(control, {"u_max", "safety_threshold", "clf_gain", "cbf_gain",
                          "cbf_gain_global", "slack_penalty", "diffusion"}, "control")
    u_max = _as_number(_get(control, "u_max", "control"), "control.u_max",
                       minimum=0.0)
    threshold = _as_number(_get(control, "safety_threshold", "control"),
                           "control.safety_threshold", minimum=0.0, exclusive=True)
    clf_gain = _as_number(_get(control, "clf_gain", "control", 1.0),
                          "control.clf_gain", minimum=0.0)
    cbf_gain = _as_number(_get(control, "cbf_gain", "control", 1.0),
                          "control.cbf_gain", minimum=0.0)
    cbf_gain_global = _get(control, "cbf_gain_global", "control", None)
    if cbf_gain_global is not None:
        cbf_gain_global = _as_number(cbf_gain_global, "control.cbf_gain_global",
                                     minimum=0.0)
    slack_penalty = _as_number(_get(control, "slack_penalty", "control", 10.0),
                               "control.slack_penalty", minimum=0.0, exclusive=True)
    diffusion = _get(control, "diffusion", "control", None)
    if diffusion is not None:
        diffusion = _as_number(diffusion, "control.diffusion", minimum=0.0)

    noise = _get(data, "noise", "scenario", {})
    _check_keys(noise, {"motion", "localization"}, "noise")
    motion_noise = _as_number(_get(noise, "motion", "noise", 0.0),
                              "noise.motion", minimum=0.0)
    localization_noise = _as_number(_get(noise, "localization", "noise", 0.0),
                                    "noise.localization", minimum=0.0)

    run = _get(data, "run", "scenario")
    _check_keys(run, {"dt", "steps", "seed"}, "run")
    dt = _as_number(_get(run, "dt", "run"), "run.dt", minimum=0.0, exclusive=True)
    steps = _as_int(_get(run, "steps", "run"), "run.steps", minimum=1)
    seed = _as_int(_get(run, "seed", "run", 0), "run.seed", minimum=0)

    scenario = Scenario(
        name=name, description=description, arena=size, cell=cell,
        n_robots=count, robot_shape=robot_shape, placement=placement,
        target_center=target_center, target_shape=target_shape,
        target_mass_scale=mass_scale, danger_regions=regions,
        comm_radius=comm_radius, collision_radius=collision_radius,
        u_max=u_max, safety_threshold=threshold, clf_gain=clf_gain,
        cbf_gain=cbf_gain, cbf_gain_global=cbf_gain_global,
        slack_penalty=slack_penalty, diffusion=diffusion,
        motion_noise=motion_noise, localization_noise=localization_noise,
        dt=dt, steps=steps, seed=seed,
    )
    # Fail on geometry problems at load time, not mid-run.
    grid = scenario.build_grid()
    scenario.danger_mask(grid)
    try:
        scenario.controller_params()
    except ParameterError as exc:
        raise ScenarioError(f"control: {exc}") from exc
    return scenario


def parse_scenario(text, *, source="<string>") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{source}: invalid scenario syntax at line {exc.lineno}, "
            f"column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"{source}: a scenario must be a JSON object")
    return scenario_from_dict(data, source=source)


def bundled_scenario_names() -> list[str]:
    pkg = resources.files("swarmsafe") / "scenarios"
    return sorted(p.name[:-len(".scenario")] for p in pkg.iterdir()
                  if p.name.endswith(".scenario"))


def load_scenario(ref) -> Scenario:
    """Load a scenario from a file path or by bundled name."""
    path = Path(ref)
    if path.suffix == ".scenario" or path.exists():
        if not path.exists():
            raise ScenarioError(f"scenario file not found: {path}")
        return parse_scenario(path.read_text(), source=str(path))
    names = bundled_scenario_names()
    if str(ref) in names:
        text = (resources.files("swarmsafe") / "scenarios" /
                f"{ref}.scenario").read_text()
        return parse_scenario(text, source=f"bundled:{ref}")
    raise ScenarioError(
        f"no scenario file or bundled scenario named {ref!r} "
        f"(bundled: {', '.join(names)})"
    )


# ----------------------------------------------------------------------
# simulation
# ----------------------------------------------------------------------
@dataclass
class RunResult:
    """Everything a finished (or safely aborted) run produced."""

    scenario: Scenario
    mode: str
    seed: int
    history: list[StepMetrics]
    frames: list[dict] | None
    final_positions: np.ndarray
    decide_seconds: list[float] = field(default_factory=list)

    @property
    def min_barrier(self) -> float:
        return min(sm.barrier for sm in self.history)

    def summary(self) -> dict:
        first, last = self.history[0], self.history[-1]
        n = self.scenario.n_robots
        per_robot_ms = [1e3 * s / n for s in self.decide_seconds]
        return {
            "scenario": self.scenario.name,
            "mode": self.mode,
            "seed": self.seed,
            "n_robots": n,
            "steps": len(self.history),
            "initial_tracking_error": first.tracking_error,
            "final_tracking_error": last.tracking_error,
            "tracking_ratio": last.tracking_error / first.tracking_error,
            "min_barrier": self.min_barrier,
            "safety_ok": self.min_barrier >= -1e-6,
            "swarm_bound_min_margin": min(sm.swarm_bound.margin for sm in self.history),
            "individual_min_margin": min(float(sm.individual_margins.min())
                                         for sm in self.history),
            "proximity_min_margin": min(sm.proximity.margin for sm in self.history),
            "collision_stop_steps": sum(bool(sm.collision_stops) for sm in self.history),
            "mean_decide_ms_per_robot": float(np.mean(per_robot_ms)),
            "max_decide_ms_per_robot": float(np.max(per_robot_ms)),
        }


class Simulation:
    """Closed-loop run of one scenario in one control mode."""

    def __init__(self, scenario: Scenario, *, mode="decentralized", seed=None):
        if mode not in SIMULATION_MODES:
            raise ParameterError(
                f"mode must be one of {SIMULATION_MODES}, got {mode!r}")
        self.scenario = scenario
        self.mode = mode
        self.seed = scenario.seed if seed is None else int(seed)
        self.grid = scenario.build_grid()
        self.ops = build_operators(self.grid)
        self.mask = scenario.danger_mask(self.grid)
        self.params = scenario.controller_params()
        self.target = scenario.target_field(self.grid)
        self.positions = scenario.initial_positions(self.grid, self.seed)
        self.step_index = 0
        self.time = 0.0
        self.decide_seconds: list[float] = []
        self.last_frame: dict | None = None

    # RNG streams: 0 = placement (used in Scenario), 1 = localization,
    # 2 = motion; keyed by step so replaying a prefix is reproducible.
    def _rng(self, stream, step):
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(stream, step)))

    def _measure(self, step) -> np.ndarray:
        sigma = self.scenario.localization_noise
        if sigma == 0.0:
            return self.positions.copy()
        noise = sigma * self._rng(1, step).standard_normal(self.positions.shape)
        return np.array([self.grid.wrap_point(p) for p in self.positions + noise])

    def _collision_pairs(self, measured) -> tuple:
        radius = self.scenario.collision_radius
        if radius <= 0.0:
            return ()
        pairs = []
        n = len(measured)
        for i in range(n):
            for j in range(i + 1, n):
                if self.grid.torus_distance(measured[i], measured[j]) <= radius:
                    pairs.append((i, j))
        return tuple(pairs)

    def step(self) -> StepMetrics:
        sc = self.scenario
        k = self.step_index

        measured = self._measure(k)
        neighbor_sets = delta_disk(measured, sc.comm_radius, extent=self.grid.extent)
        fields_m = [robot_density(self.grid, p, sc.robot_shape) for p in measured]

        t0 = time.perf_counter()
        if self.mode == "decentralized":
            decisions = []
            for i, ns in enumerate(neighbor_sets):
                try:
                    decisions.append(decide(
                        fields_m[i], [fields_m[j] for j in ns.others],
                        self.target, self.params, self.grid, self.mask, self.ops))
                except InfeasibleProblem as exc:
                    raise ControllerError(
                        f"robot {i} decision infeasible at step {k}: {exc}",
                        robot_id=i, step=k) from exc
            velocities = np.array([d.velocity for d in decisions])
            relaxations = np.array([d.relaxation for d in decisions])
            threats = np.array([d.threat for d in decisions])
            self_rates = np.array([d.self_rate for d in decisions])
        else:
            central = centralized_control(fields_m, self.target, self.params,
                                          self.grid, self.mask, self.ops)
            velocities = central.velocities.copy()
            relaxations = np.full(sc.n_robots, np.nan)
            threats = np.full(sc.n_robots, np.nan)
            self_rates = np.full(sc.n_robots, np.nan)
        self.decide_seconds.append(time.perf_counter() - t0)

        stopped = self._collision_pairs(measured)
        for i, j in stopped:
            velocities[i] = 0.0
            velocities[j] = 0.0

        # Verification universe: true fields, applied velocities, the
        # controllers' own graph.
        fields_t = [robot_density(self.grid, p, sc.robot_shape)
                    for p in self.positions]
        tracking, barrier = global_metrics(fields_t, self.target,
                                           self.params.safety_threshold,
                                           self.grid, self.mask)
        local_h, local_v = local_values(fields_t, neighbor_sets, self.target,
                                        self.params, self.grid, self.mask)
        swarm = verify_swarm_bound(fields_t, neighbor_sets, velocities,
                                   self.params, self.grid, self.mask, self.ops)
        individual = verify_individual_bounds(fields_t, neighbor_sets, velocities,
                                              self.params, self.grid, self.mask,
                                              self.ops)
        proximity = verify_neighbor_proximity(fields_t, neighbor_sets,
                                              self.grid, self.mask)
        sm = StepMetrics(
            step=k, t=self.time, tracking_error=tracking, barrier=barrier,
            local_barrier_sum=float(local_h.sum()), local_barriers=local_h,
            local_tracking=local_v, relaxations=relaxations, threats=threats,
            self_rates=self_rates, swarm_bound=swarm,
            individual_margins=individual, proximity=proximity,
            collision_stops=stopped,
        )
        self.last_frame = {
            "step": k,
            "t": self.time,
            "positions": self.positions.tolist(),
            "measured": measured.tolist(),
            "velocities": velocities.tolist(),
            "barrier": barrier,
            "tracking_error": tracking,
        }

        new_positions = self.positions + sc.dt * velocities
        if sc.motion_noise > 0.0:
            scale = np.sqrt(2.0 * sc.motion_noise * sc.dt)
            new_positions = new_positions + scale * self._rng(2, k).standard_normal(
                self.positions.shape)
        self.positions = np.array([self.grid.wrap_point(p) for p in new_positions])
        self.step_index += 1
        self.time += sc.dt
        return sm

    def run(self, *, record_frames=False) -> RunResult:
        history = []
        frames = [] if record_frames else None
        for _ in range(self.scenario.steps):
            history.append(self.step())
            if record_frames:
                frames.append(self.last_frame)
        return RunResult(
            scenario=self.scenario, mode=self.mode, seed=self.seed,
            history=history, frames=frames, final_positions=self.positions.copy(),
            decide_seconds=list(self.decide_seconds),
        )

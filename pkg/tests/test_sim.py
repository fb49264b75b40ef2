"""Scenario schema, placement, and the closed-loop simulation."""

import copy
import json

import numpy as np
import pytest

from swarmsafe.errors import ParameterError, ScenarioError
from swarmsafe.sim import (MAX_ROBOTS, BoxRegion, CellsRegion, CircleRegion,
                           ExplicitPlacement, RunResult, ScatterPlacement,
                           Scenario, Simulation, bundled_scenario_names,
                           load_scenario, parse_scenario, scenario_from_dict)

BASE = {
    "name": "tiny",
    "description": "two robots and a small disk hazard",
    "arena": {"size": [1.2, 1.2], "cell": 0.1},
    "robots": {
        "count": 2,
        "shape": {"precision": 9.0},
        "placement": {"kind": "explicit", "positions": [[-0.3, 0.0], [0.3, 0.0]]},
    },
    "target": {"center": [0.0, 0.3], "shape": {"precision": 6.0}},
    "danger": {"regions": [{"kind": "circle", "center": [0.0, -0.4], "radius": 0.15}]},
    "comm": {"radius": 0.8},
    "control": {"u_max": 0.8, "safety_threshold": 1.0},
    "run": {"dt": 0.05, "steps": 4, "seed": 1},
}


def make(**overrides):
    doc = copy.deepcopy(BASE)
    for dotted, value in overrides.items():
        node = doc
        *parents, leaf = dotted.split(".")
        for key in parents:
            node = node.setdefault(key, {})
        node[leaf] = value
    return scenario_from_dict(doc)


# ----------------------------------------------------------------------
# regions and placement
# ----------------------------------------------------------------------
def test_region_primitives_rasterize():
    sc = make()
    grid = sc.build_grid()
    assert len(CircleRegion((0.0, 0.0), 0.15).rasterize(grid)) > 0
    assert len(BoxRegion((-0.2, -0.2), (0.2, 0.2)).rasterize(grid)) == 4 * 4
    assert CellsRegion((3, 1, 3)).rasterize(grid).indices.tolist() == [1, 3]
    with pytest.raises(ScenarioError):
        CellsRegion((grid.n_cells,)).rasterize(grid)


def test_explicit_placement_wraps_and_counts():
    sc = make()
    grid = sc.build_grid()
    pos = ExplicitPlacement(((-0.9, 0.0), (0.3, 0.0))).sample(grid, 2, 0)
    lo = np.asarray(grid.lower_corner)
    hi = lo + np.asarray(grid.extent)
    assert np.all(pos >= lo) and np.all(pos < hi)
    with pytest.raises(ScenarioError):
        ExplicitPlacement(((0.0, 0.0),)).sample(grid, 2, 0)


def test_scatter_placement_deterministic_and_separated():
    sc = make()
    grid = sc.build_grid()
    placement = ScatterPlacement(center=(0.0, 0.0), spread=0.3, min_separation=0.15)
    a = placement.sample(grid, 5, seed=9)
    b = placement.sample(grid, 5, seed=9)
    np.testing.assert_array_equal(a, b)
    c = placement.sample(grid, 5, seed=10)
    assert not np.array_equal(a, c)
    for i in range(5):
        for j in range(i + 1, 5):
            assert grid.torus_distance(a[i], a[j]) >= 0.15


def test_scatter_placement_gives_up():
    sc = make()
    grid = sc.build_grid()
    placement = ScatterPlacement(center=(0.0, 0.0), spread=0.01,
                                 min_separation=1.0, max_attempts=50)
    with pytest.raises(ScenarioError):
        placement.sample(grid, 4, seed=0)


# ----------------------------------------------------------------------
# schema validation
# ----------------------------------------------------------------------
def test_scenario_roundtrip_fields():
    sc = make()
    assert isinstance(sc, Scenario)
    assert sc.name == "tiny"
    assert sc.n_robots == 2
    assert sc.comm_radius == 0.8
    assert sc.collision_radius == 0.0         # default
    assert sc.motion_noise == 0.0 and sc.localization_noise == 0.0
    grid = sc.build_grid()
    assert (grid.nx, grid.ny) == (12, 12)
    assert grid.origin == pytest.approx((-0.55, -0.55))


def test_unknown_key_is_named():
    doc = copy.deepcopy(BASE)
    doc["robots"]["colour"] = "red"
    with pytest.raises(ScenarioError, match=r"robots\.colour"):
        scenario_from_dict(doc)


def test_missing_key_is_named():
    doc = copy.deepcopy(BASE)
    del doc["control"]["safety_threshold"]
    with pytest.raises(ScenarioError, match=r"control\.safety_threshold"):
        scenario_from_dict(doc)


def test_bad_types_are_named():
    with pytest.raises(ScenarioError, match=r"run\.steps"):
        make(**{"run.steps": 2.5})
    with pytest.raises(ScenarioError, match=r"comm\.radius"):
        make(**{"comm.radius": 0.0})
    with pytest.raises(ScenarioError, match=r"target\.shape\.precision"):
        make(**{"target.shape.precision": -4.0})
    with pytest.raises(ScenarioError, match=r"robots\.count"):
        make(**{"robots.count": MAX_ROBOTS + 1})


def test_arena_must_be_whole_cells():
    with pytest.raises(ScenarioError, match=r"arena\.size"):
        make(**{"arena.size": [1.25, 1.2]})


def test_anisotropic_shape_matrix():
    sc = make(**{"robots.shape.precision": [[9.0, 1.0], [1.0, 12.0]]})
    np.testing.assert_array_equal(sc.robot_shape.matrix(), [[9.0, 1.0], [1.0, 12.0]])
    with pytest.raises(ScenarioError, match=r"robots\.shape\.precision"):
        make(**{"robots.shape.precision": [[1.0, 5.0], [5.0, 1.0]]})


def test_region_parse_errors():
    with pytest.raises(ScenarioError, match=r"danger\.regions\[0\]\.kind"):
        make(**{"danger.regions": [{"kind": "hexagon"}]})
    with pytest.raises(ScenarioError, match=r"danger\.regions\[0\]"):
        make(**{"danger.regions": [{"kind": "box", "min": [0.5, 0], "max": [0, 1]}]})
    # out-of-range cells are caught at load time, not mid-run
    with pytest.raises(ScenarioError, match="out of range"):
        make(**{"danger.regions": [{"kind": "cells", "indices": [10_000]}]})


def test_parse_scenario_reports_position():
    with pytest.raises(ScenarioError, match="line 3"):
        parse_scenario('{\n"name": "x",\n"arena": }', source="broken.scenario")
    with pytest.raises(ScenarioError, match="JSON object"):
        parse_scenario("[1, 2]")


def test_load_scenario_bundled_and_missing(tmp_path):
    names = bundled_scenario_names()
    assert "gauntlet15" in names and "quad4_noisy" in names
    sc = load_scenario("gauntlet15")
    assert sc.n_robots == 15
    path = tmp_path / "custom.scenario"
    path.write_text(json.dumps(BASE))
    assert load_scenario(path).name == "tiny"
    with pytest.raises(ScenarioError, match="no scenario"):
        load_scenario("does_not_exist")
    with pytest.raises(ScenarioError, match="not found"):
        load_scenario(tmp_path / "missing.scenario")


# ----------------------------------------------------------------------
# simulation behavior
# ----------------------------------------------------------------------
def test_simulation_rejects_bad_mode():
    with pytest.raises(ParameterError):
        Simulation(make(), mode="magic")


def test_run_produces_history_and_summary():
    result = Simulation(make()).run()
    assert isinstance(result, RunResult)
    assert len(result.history) == 4
    assert len(result.decide_seconds) == 4
    assert result.final_positions.shape == (2, 2)
    s = result.summary()
    for key in ("scenario", "mode", "seed", "n_robots", "steps",
                "initial_tracking_error", "final_tracking_error",
                "tracking_ratio", "min_barrier", "safety_ok",
                "swarm_bound_min_margin", "individual_min_margin",
                "proximity_min_margin", "collision_stop_steps",
                "mean_decide_ms_per_robot", "max_decide_ms_per_robot"):
        assert key in s
    assert s["steps"] == 4 and s["n_robots"] == 2
    assert result.min_barrier == min(sm.barrier for sm in result.history)


def test_noiseless_runs_are_reproducible():
    a = Simulation(make()).run()
    b = Simulation(make()).run()
    np.testing.assert_array_equal(a.final_positions, b.final_positions)
    assert [sm.barrier for sm in a.history] == [sm.barrier for sm in b.history]


def test_seeded_noise_is_reproducible_but_seed_dependent():
    noisy = {"noise.motion": 0.02, "noise.localization": 0.01, "run.steps": 3}
    a = Simulation(make(**noisy), seed=5).run()
    b = Simulation(make(**noisy), seed=5).run()
    c = Simulation(make(**noisy), seed=6).run()
    np.testing.assert_array_equal(a.final_positions, b.final_positions)
    assert not np.array_equal(a.final_positions, c.final_positions)


def test_seed_override_and_default():
    sc = make()
    assert Simulation(sc).seed == sc.seed
    assert Simulation(sc, seed=123).seed == 123


def test_motion_noise_moves_robots():
    sc = make(**{"noise.motion": 0.05, "control.u_max": 0.0,
                 "control.safety_threshold": 5.0})
    result = Simulation(sc).run()
    start = sc.initial_positions(sc.build_grid(), result.seed)
    assert not np.array_equal(result.final_positions, start)


def test_collision_stop_freezes_pair():
    sc = make(**{"comm.collision_radius": 0.7})    # robots start 0.6 apart
    sim = Simulation(sc)
    start = sim.positions.copy()
    sm = sim.step()
    assert sm.collision_stops == ((0, 1),)
    np.testing.assert_array_equal(sim.positions, start)   # nobody moved
    frame = sim.last_frame
    assert frame["velocities"] == [[0.0, 0.0], [0.0, 0.0]]


def test_frames_recorded_on_request():
    result = Simulation(make()).run(record_frames=True)
    assert result.frames is not None and len(result.frames) == 4
    for key in ("step", "t", "positions", "measured", "velocities",
                "barrier", "tracking_error"):
        assert key in result.frames[0]
    assert Simulation(make()).run().frames is None


def test_centralized_mode_runs():
    result = Simulation(make(), mode="centralized").run()
    assert len(result.history) == 4
    assert np.isnan(result.history[0].relaxations).all()
    assert result.summary()["mode"] == "centralized"


def test_explicit_count_mismatch_surfaces_at_init():
    sc = make(**{"robots.placement.positions": [[0.0, 0.0]]})
    with pytest.raises(ScenarioError):
        Simulation(sc)

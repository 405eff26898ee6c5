"""Scenario files: TOML descriptions of the arena, robot start, and target.

Example:

    [arena]
    bounds = [0.0, 0.0, 60.0, 60.0]

    [robot]
    start = [45.0, 55.0]
    heading_deg = 90.0

    [target]
    position = [45.0, 15.0]
    outer_radius = 2.0
    # optional: after the robot reaches the target it hops to each of
    # these positions in turn (moving-target missions)
    waypoints = [[20.0, 20.0], [40.0, 35.0]]

    [sim]
    seed = 7
    noise = true

Angles are degrees in files (humans point robots in degrees) and radians
everywhere in code.
"""

from __future__ import annotations

import math
from importlib import resources

try:
    import tomllib
except ModuleNotFoundError:  # python 3.10
    import tomli as tomllib

from favbot.kinematics import Pose
from favbot.world import DEFAULT_BOUNDS, DEFAULT_TICK_DT, StarTarget, World


def _require(table: dict, section: str, key: str):
    if key not in table:
        raise ValueError(f"scenario missing [{section}] {key}")
    return table[key]


def _pair(value, where: str) -> tuple[float, float]:
    if not isinstance(value, list) or len(value) != 2:
        raise ValueError(f"{where} must be a [x, y] pair, got {value!r}")
    return float(value[0]), float(value[1])


def load_scenario(text: str, seed: int | None = None, noise: bool | None = None) -> World:
    """Build a world from scenario text; seed/noise override the [sim] table."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ValueError(f"scenario is not valid TOML: {e}") from None

    robot_tbl = doc.get("robot")
    target_tbl = doc.get("target")
    if not isinstance(robot_tbl, dict) or not isinstance(target_tbl, dict):
        raise ValueError("scenario needs [robot] and [target] sections")

    x, y = _pair(_require(robot_tbl, "robot", "start"), "[robot] start")
    heading = math.radians(float(_require(robot_tbl, "robot", "heading_deg")))
    robot = Pose(x, y, heading)

    target = StarTarget(
        position=_pair(_require(target_tbl, "target", "position"), "[target] position"),
        outer_radius=float(target_tbl.get("outer_radius", 2.0)),
        orientation=math.radians(float(target_tbl.get("orientation_deg", 0.0))),
    )
    waypoints_raw = target_tbl.get("waypoints", [])
    if not isinstance(waypoints_raw, list):
        raise ValueError(f"[target] waypoints must be a list of [x, y] pairs, got {waypoints_raw!r}")
    waypoints = [_pair(wp, f"waypoint {i}") for i, wp in enumerate(waypoints_raw)]

    arena_tbl = doc.get("arena", {})
    bounds = arena_tbl.get("bounds", list(DEFAULT_BOUNDS))
    if not isinstance(bounds, list) or len(bounds) != 4:
        raise ValueError(f"[arena] bounds must be [xmin, ymin, xmax, ymax], got {bounds!r}")

    sim_tbl = doc.get("sim", {})
    return World(
        robot=robot,
        target=target,
        bounds=tuple(float(b) for b in bounds),
        seed=int(sim_tbl.get("seed", 0)) if seed is None else seed,
        noise=bool(sim_tbl.get("noise", True)) if noise is None else noise,
        waypoints=waypoints,
        tick_dt=float(sim_tbl.get("tick_dt", DEFAULT_TICK_DT)),
    )


def load_scenario_file(path, seed: int | None = None, noise: bool | None = None) -> World:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read(), seed=seed, noise=noise)


def packaged_scenario_text(name: str) -> str:
    """Text of a scenario shipped with the package (name without .toml)."""
    res = resources.files("favbot").joinpath(f"scenarios/{name}.toml")
    try:
        return res.read_text("utf-8")
    except FileNotFoundError:
        available = sorted(
            p.name.removesuffix(".toml")
            for p in resources.files("favbot").joinpath("scenarios").iterdir()
            if p.name.endswith(".toml")
        )
        raise ValueError(f"no packaged scenario {name!r}; available: {available}") from None


def packaged_scenario(name: str, seed: int | None = None, noise: bool | None = None) -> World:
    return load_scenario(packaged_scenario_text(name), seed=seed, noise=noise)

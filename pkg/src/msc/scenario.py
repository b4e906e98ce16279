"""Scenario files: JSON experiment descriptions, validated before any computation.

Example::

    {
      "schema": "msc-scenario/1",
      "name": "sim1-2d",
      "graph": {"n": 3, "edges": [[1, 2], [2, 3]]},      // or {"preset": "substitute16"}
      "d": 2,
      "scalings": [
        {"type": "identity"},
        {"type": "rotation2", "theta": 2.0943951023931953},
        {"type": "explicit", "entries": [[2, 1], [0, 2]], "negate": true}
      ],
      "dynamics": "single",                               // or "double" with "alpha"
      "initial": {"seed": 7, "range": [-1, 1]},
      "integrator": {"dt": 0.005, "t_end": 40, "record_every": 20}
    }

Agents and vertices are 1-indexed. A scaling entry may carry ``"repeat": k``
to stand for ``k`` consecutive agents. ``alpha`` is either a number or
``{"critical_multiple": c}``, meaning ``c`` times the exact critical gain of
the scenario's own network. ``initial`` takes explicit ``positions`` /
``velocities`` arrays (n rows of d numbers) or ``{"seed", "range"}``, which
draws positions and then velocities from one SplitMix64 stream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from msc.errors import GraphError, Indefinite, MscError, ScenarioError
from msc.graph import NetworkGraph, is_connected, substitute_graph
from msc.rng import SplitMix64
from msc.scaling import ScalingSet, classify, rotation2, rotation3
from msc.sim import IntegratorConfig

SCHEMA = "msc-scenario/1"
GRAPH_PRESETS = {"substitute16": substitute_graph}
BUILTIN = ("sim1-2d", "sim1-3d", "sim2-stable", "sim2-unstable")

DEFAULT_TOLERANCES = {"converge": 1e-5, "cluster": 1e-3}


@dataclass
class Scenario:
    name: str
    graph: NetworkGraph
    d: int
    scalings: ScalingSet
    dynamics: str
    initial_positions: np.ndarray
    initial_velocities: np.ndarray | None
    integrator: IntegratorConfig
    alpha: float | None = None
    alpha_multiple: float | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    description: str = ""
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.graph.n

    def resolve_alpha(self, alpha_critical_exact: float) -> float:
        if self.alpha is not None:
            return self.alpha
        return self.alpha_multiple * alpha_critical_exact


def _num(value, where: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(where, f"expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ScenarioError(where, "must be finite")
    if positive and v <= 0:
        raise ScenarioError(where, f"must be positive, got {v}")
    return v


def _int(value, where: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(where, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ScenarioError(where, f"must be >= {minimum}, got {value}")
    return value


def _matrix(value, where: str, rows: int, cols: int) -> np.ndarray:
    if not isinstance(value, list) or len(value) != rows:
        raise ScenarioError(where, f"expected {rows} rows")
    out = np.empty((rows, cols))
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != cols:
            raise ScenarioError(f"{where}[{i}]", f"expected {cols} numbers")
        for j, v in enumerate(row):
            out[i, j] = _num(v, f"{where}[{i}][{j}]")
    return out


def _parse_graph(spec) -> NetworkGraph:
    if not isinstance(spec, dict):
        raise ScenarioError("graph", "expected an object")
    if "preset" in spec:
        preset = spec["preset"]
        if preset not in GRAPH_PRESETS:
            raise ScenarioError("graph.preset", f"unknown preset {preset!r}")
        return GRAPH_PRESETS[preset]()
    if "n" not in spec:
        raise ScenarioError("graph.n", "missing")
    n = _int(spec["n"], "graph.n")
    edges = spec.get("edges", [])
    if not isinstance(edges, list):
        raise ScenarioError("graph.edges", "expected a list of [i, j] pairs")
    for k, e in enumerate(edges):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) and not isinstance(v, bool) for v in e)):
            raise ScenarioError(f"graph.edges[{k}]", f"expected [i, j] integers, got {e!r}")
    try:
        return NetworkGraph(n, [tuple(e) for e in edges])
    except GraphError as exc:
        raise ScenarioError("graph.edges", str(exc)) from None


def scaling_matrix_from_spec(spec, d: int, where: str) -> np.ndarray:
    if not isinstance(spec, dict):
        raise ScenarioError(where, "expected an object")
    kind = spec.get("type")
    if kind == "identity":
        m = np.eye(d)
    elif kind == "rotation2":
        if d != 2:
            raise ScenarioError(where, f"rotation2 needs d = 2, scenario has d = {d}")
        m = rotation2(_num(spec.get("theta"), f"{where}.theta"))
    elif kind == "rotation3":
        if d != 3:
            raise ScenarioError(where, f"rotation3 needs d = 3, scenario has d = {d}")
        axis = spec.get("axis")
        if not (isinstance(axis, list) and len(axis) == 3):
            raise ScenarioError(f"{where}.axis", "expected 3 numbers")
        axis = [_num(v, f"{where}.axis[{i}]") for i, v in enumerate(axis)]
        try:
            m = rotation3(axis, _num(spec.get("theta"), f"{where}.theta"))
        except ValueError as exc:
            raise ScenarioError(f"{where}.axis", str(exc)) from None
    elif kind == "explicit":
        m = _matrix(spec.get("entries"), f"{where}.entries", d, d)
    else:
        raise ScenarioError(f"{where}.type", f"unknown scaling type {kind!r}")
    negate = spec.get("negate", False)
    if not isinstance(negate, bool):
        raise ScenarioError(f"{where}.negate", "expected true or false")
    return -m if negate else m


def _parse_scalings(specs, d: int, n: int) -> ScalingSet:
    if not isinstance(specs, list):
        raise ScenarioError("scalings", "expected a list")
    members = []
    for k, spec in enumerate(specs):
        where = f"scalings[{k}]"
        repeat = _int(spec.get("repeat", 1), f"{where}.repeat") if isinstance(spec, dict) else 1
        m = scaling_matrix_from_spec(spec, d, where)
        for _ in range(repeat):
            agent = len(members) + 1
            try:
                members.append(classify(m))
            except Indefinite as exc:
                raise ScenarioError(f"scalings (agent {agent})", f"agent {agent}: {exc}") from None
    if len(members) != n:
        raise ScenarioError("scalings", f"{len(members)} scalings for {n} agents")
    return ScalingSet(members)


def _parse_initial(spec, n: int, d: int, double: bool):
    if not isinstance(spec, dict):
        raise ScenarioError("initial", "expected an object")
    stream = None
    if "seed" in spec:
        seed = spec["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ScenarioError("initial.seed", "expected a non-negative integer")
        rng = spec.get("range", [-1.0, 1.0])
        if not (isinstance(rng, list) and len(rng) == 2):
            raise ScenarioError("initial.range", "expected [lo, hi]")
        lo, hi = (_num(v, f"initial.range[{i}]") for i, v in enumerate(rng))
        if not lo < hi:
            raise ScenarioError("initial.range", "lo must be below hi")
        stream = (SplitMix64(seed), lo, hi)
    vel_range = None
    if "velocity_range" in spec:
        vr = spec["velocity_range"]
        if not (isinstance(vr, list) and len(vr) == 2):
            raise ScenarioError("initial.velocity_range", "expected [lo, hi]")
        vel_range = tuple(_num(v, f"initial.velocity_range[{i}]") for i, v in enumerate(vr))

    def draw(name, bounds=None):
        if name in spec:
            return _matrix(spec[name], f"initial.{name}", n, d).reshape(-1)
        if stream is None:
            raise ScenarioError(f"initial.{name}", "missing (give explicit values or a seed)")
        gen, lo, hi = stream
        lo, hi = bounds or (lo, hi)
        return np.array(gen.uniform_array(lo, hi, n * d))

    positions = draw("positions")
    velocities = draw("velocities", vel_range) if double else None
    return positions, velocities


def _parse_integrator(spec) -> IntegratorConfig:
    spec = spec or {}
    if not isinstance(spec, dict):
        raise ScenarioError("integrator", "expected an object")
    kw = {}
    for key in ("dt", "t_end"):
        if key in spec:
            kw[key] = _num(spec[key], f"integrator.{key}", positive=True)
    if "record_every" in spec:
        kw["record_every"] = _int(spec["record_every"], "integrator.record_every")
    try:
        return IntegratorConfig(**kw)
    except ValueError as exc:
        raise ScenarioError("integrator", str(exc)) from None


def parse_scenario(data: dict) -> Scenario:
    """Validate a decoded scenario document. Raises ScenarioError naming the field."""
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "expected a JSON object")
    if data.get("schema") != SCHEMA:
        raise ScenarioError("schema", f"expected {SCHEMA!r}, got {data.get('schema')!r}")
    name = data.get("name")
    if not isinstance(name, str) or not name:
        raise ScenarioError("name", "expected a non-empty string")
    if "graph" not in data:
        raise ScenarioError("graph", "missing")
    graph = _parse_graph(data["graph"])
    if not is_connected(graph):
        raise ScenarioError("graph", "interaction graph is not connected")
    if "d" not in data:
        raise ScenarioError("d", "missing")
    d = _int(data["d"], "d")
    scalings = _parse_scalings(data.get("scalings"), d, graph.n)
    dynamics = data.get("dynamics")
    if dynamics not in ("single", "double"):
        raise ScenarioError("dynamics", f"expected 'single' or 'double', got {dynamics!r}")
    alpha = multiple = None
    if dynamics == "double":
        if "alpha" not in data:
            raise ScenarioError("alpha", "required for double-integrator dynamics")
        a = data["alpha"]
        if isinstance(a, dict):
            if set(a) != {"critical_multiple"}:
                raise ScenarioError("alpha", "expected a number or {\"critical_multiple\": c}")
            multiple = _num(a["critical_multiple"], "alpha.critical_multiple", positive=True)
        else:
            alpha = _num(a, "alpha", positive=True)
    elif "alpha" in data:
        raise ScenarioError("alpha", "only meaningful for double-integrator dynamics")
    positions, velocities = _parse_initial(data.get("initial"), graph.n, d, dynamics == "double")
    integrator = _parse_integrator(data.get("integrator"))
    tol = dict(DEFAULT_TOLERANCES)
    extra = data.get("tolerances", {})
    if not isinstance(extra, dict):
        raise ScenarioError("tolerances", "expected an object")
    for key, value in extra.items():
        if key not in DEFAULT_TOLERANCES:
            raise ScenarioError(f"tolerances.{key}", "unknown tolerance")
        tol[key] = _num(value, f"tolerances.{key}", positive=True)
    description = data.get("description", "")
    if not isinstance(description, str):
        raise ScenarioError("description", "expected a string")
    return Scenario(
        name=name,
        graph=graph,
        d=d,
        scalings=scalings,
        dynamics=dynamics,
        initial_positions=positions,
        initial_velocities=velocities,
        integrator=integrator,
        alpha=alpha,
        alpha_multiple=multiple,
        tolerances=tol,
        description=description,
        raw=data,
    )


def load_scenario(ref: str | Path) -> Scenario:
    """Load a scenario from a path, or by built-in name (e.g. ``sim1-2d``)."""
    path = Path(ref)
    if path.exists():
        text = path.read_text()
    elif str(ref) in BUILTIN:
        text = resources.files("msc").joinpath("scenarios", f"{ref}.json").read_text()
    else:
        raise ScenarioError("<file>", f"no such scenario file or built-in: {ref}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("<file>", f"invalid JSON: {exc}") from None
    try:
        return parse_scenario(data)
    except ScenarioError:
        raise
    except MscError as exc:
        raise ScenarioError("<scenario>", str(exc)) from None

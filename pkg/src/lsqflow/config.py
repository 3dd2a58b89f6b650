"""Run-configuration parsing with exhaustive schema validation.

``parse_config`` reports every violation it can find in one pass rather
than stopping at the first, so a config file can be fixed in a single
edit-run cycle.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigParseError, LsqflowError, SchemaError
from .graphs import FAMILIES, Graph, graph_from_dict, graph_to_dict
from .plotting import PlotSpec
from .problem import NetworkLinearEquation
from .switching import SwitchingSignal

MODES = (
    "analyze", "solve-lsq", "simulate-ct", "simulate-dt",
    "simulate-switching", "epsilon-star", "graph-feasibility",
)

# Modes that need each input section.
_NEEDS_PROBLEM = tuple(m for m in MODES if m != "graph-feasibility")
_NEEDS_GRAPH = ("analyze", "simulate-ct", "simulate-dt", "epsilon-star")
_NEEDS_X0 = ("simulate-ct", "simulate-dt", "simulate-switching")

DEFAULT_STEP_H = 0.005
DEFAULT_T_END = 200.0
DEFAULT_MAX_STEPS = 40000
DEFAULT_RECORD_EVERY = 10


@dataclass(eq=False)
class RunConfig:
    mode: str
    problem: Optional[NetworkLinearEquation] = None
    graph: Optional[Graph] = None
    switching: Optional[SwitchingSignal] = None
    x0: Optional[np.ndarray] = None
    v0: Optional[np.ndarray] = None
    step_h: float = DEFAULT_STEP_H
    t_end: float = DEFAULT_T_END
    record_every: int = DEFAULT_RECORD_EVERY
    epsilon: Optional[float] = None
    max_steps: int = DEFAULT_MAX_STEPS
    alpha: float = 0.0
    rows: Optional[list] = None            # graph-feasibility (family, n) pairs
    out_csv: Optional[str] = None
    out_json: Optional[str] = None
    plot: Optional[PlotSpec] = None


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _numeric_matrix(v):
    if not isinstance(v, list) or not v:
        return None
    width = None
    for row in v:
        if not isinstance(row, list) or not row or not all(_is_number(x) for x in row):
            return None
        if width is None:
            width = len(row)
        elif len(row) != width:
            return None
    return np.array(v, dtype=float)


def _numeric_vector(v):
    if not isinstance(v, list) or not all(_is_number(x) for x in v):
        return None
    return np.array(v, dtype=float)


def _parse_problem(section, violations):
    if not isinstance(section, dict):
        violations.append(("problem", "must be an object with keys H and z"))
        return None
    H = None
    z = None
    if "H" not in section:
        violations.append(("H", "required"))
    else:
        H = _numeric_matrix(section["H"])
        if H is None:
            violations.append(("H", "must be a non-empty rectangular numeric matrix"))
    if "z" not in section:
        violations.append(("z", "required"))
    else:
        z = _numeric_vector(section["z"])
        if z is None:
            violations.append(("z", "must be a numeric array"))
    if H is None or z is None:
        return None
    try:
        return NetworkLinearEquation(H, z)
    except LsqflowError as exc:
        violations.append(("problem", str(exc)))
        return None


def _parse_graph(section, violations, path="graph"):
    try:
        return graph_from_dict(section)
    except (LsqflowError, ValueError) as exc:
        violations.append((path, str(exc)))
        return None


def _parse_switching(section, violations):
    if not isinstance(section, dict):
        violations.append(("switching", "must be an object"))
        return None
    ok = True
    period = section.get("period_T")
    if period is None:
        violations.append(("period_T", "required"))
        ok = False
    elif not _is_number(period) or period <= 0:
        violations.append(("period_T", "must be positive"))
        ok = False
    graph_specs = section.get("graphs")
    graphs = []
    if not isinstance(graph_specs, list) or not graph_specs:
        violations.append(("graphs", "must be a non-empty list of graph objects"))
        ok = False
    else:
        for k, gs in enumerate(graph_specs):
            g = _parse_graph(gs, violations, path=f"graphs[{k}]")
            if g is None:
                ok = False
            else:
                graphs.append(g)
    if not ok:
        return None
    try:
        return SwitchingSignal(period_T=float(period), graphs=tuple(graphs))
    except LsqflowError as exc:
        violations.append(("switching", str(exc)))
        return None


def _parse_plot(section, violations):
    if not isinstance(section, dict):
        violations.append(("plot", "must be an object"))
        return None
    series = section.get("series")
    if not isinstance(series, list) or not all(isinstance(s, str) for s in series):
        violations.append(("series", "must be a list of component names"))
        return None
    return PlotSpec(
        series=tuple(series),
        xlabel=str(section.get("xlabel", "t")),
        ylabel=str(section.get("ylabel", "value")),
        path=section.get("path"),
    )


def _positive(data, key, default, violations, integer=False):
    if key not in data:
        return default
    v = data[key]
    if integer:
        if not _is_int(v) or v < 1:
            violations.append((key, "must be a positive integer"))
            return default
        return v
    if not _is_number(v) or v <= 0:
        violations.append((key, "must be positive"))
        return default
    return float(v)


def parse_config(text: str, base_dir: Optional[str] = None,
                 default_mode: Optional[str] = None) -> RunConfig:
    """Parse and validate a JSON run configuration.

    ``base_dir`` resolves a relative ``problem_path``; ``default_mode``
    fills in a missing ``mode`` (the CLI passes its subcommand here).
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(str(exc), exc.lineno, exc.colno) from exc
    if not isinstance(data, dict):
        raise SchemaError([("$", "top level must be an object")])

    violations = []
    mode = data.get("mode", default_mode)
    if mode is None:
        violations.append(("mode", "required"))
    elif mode not in MODES:
        violations.append(("mode", f"must be one of {', '.join(MODES)}"))
    elif default_mode is not None and "mode" in data and data["mode"] != default_mode:
        violations.append(("mode", f"config says {data['mode']!r} but the "
                                   f"command requested {default_mode!r}"))

    problem = None
    if "problem_path" in data:
        path = data["problem_path"]
        if base_dir is not None and not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        try:
            with open(path) as fh:
                problem = _parse_problem(json.load(fh), violations)
        except OSError as exc:
            violations.append(("problem_path", str(exc)))
        except json.JSONDecodeError as exc:
            violations.append(("problem_path", f"invalid JSON: {exc}"))
    elif "problem" in data:
        problem = _parse_problem(data["problem"], violations)
    elif mode in _NEEDS_PROBLEM:
        violations.append(("problem", "required"))

    graph = None
    if "graph" in data:
        graph = _parse_graph(data["graph"], violations)
    elif mode in _NEEDS_GRAPH:
        violations.append(("graph", "required"))

    switching = None
    if "switching" in data:
        switching = _parse_switching(data["switching"], violations)
    elif mode == "simulate-switching":
        violations.append(("switching", "required"))

    step_h = _positive(data, "step_h", DEFAULT_STEP_H, violations)
    t_end = _positive(data, "t_end", DEFAULT_T_END, violations)
    record_every = _positive(data, "record_every", DEFAULT_RECORD_EVERY,
                             violations, integer=True)
    max_steps = _positive(data, "max_steps", DEFAULT_MAX_STEPS, violations, integer=True)
    epsilon = None
    if "epsilon" in data:
        epsilon = _positive(data, "epsilon", None, violations)
    elif mode == "simulate-dt":
        violations.append(("epsilon", "required"))
    alpha = 0.0
    if "alpha" in data:
        v = data["alpha"]
        if not _is_number(v) or v < 0:
            violations.append(("alpha", "must be nonnegative"))
        else:
            alpha = float(v)

    x0 = v0 = None
    if "x0" in data:
        x0 = _numeric_vector(data["x0"])
        if x0 is None:
            violations.append(("x0", "must be a numeric array"))
    elif mode in _NEEDS_X0:
        violations.append(("x0", "required"))
    if "v0" in data:
        v0 = _numeric_vector(data["v0"])
        if v0 is None:
            violations.append(("v0", "must be a numeric array"))
    if problem is not None:
        nm = problem.n_nodes * problem.dim
        if x0 is not None and x0.shape != (nm,):
            violations.append(("x0", f"must have length {nm}"))
        if v0 is not None and v0.shape != (nm,):
            violations.append(("v0", f"must have length {nm}"))
        if graph is not None and graph.n_nodes != problem.n_nodes:
            violations.append(("graph", f"has {graph.n_nodes} nodes, problem has "
                                        f"{problem.n_nodes}"))
        if switching is not None and switching.graphs[0].n_nodes != problem.n_nodes:
            violations.append(("switching", "graphs disagree with problem node count"))

    rows = None
    if "rows" in data:
        rows = []
        raw_rows = data["rows"]
        if not isinstance(raw_rows, list):
            violations.append(("rows", "must be a list of [family, n] pairs"))
            rows = None
        else:
            for k, item in enumerate(raw_rows):
                if (not isinstance(item, list) or len(item) != 2
                        or item[0] not in FAMILIES or not _is_int(item[1])):
                    violations.append((f"rows[{k}]", "must be [family, n] with a known family"))
                else:
                    rows.append((item[0], item[1]))
    elif mode == "graph-feasibility":
        violations.append(("rows", "required"))

    plot = _parse_plot(data["plot"], violations) if "plot" in data else None

    out_csv = data.get("out_csv")
    out_json = data.get("out_json")
    for key, val in (("out_csv", out_csv), ("out_json", out_json)):
        if val is not None and not isinstance(val, str):
            violations.append((key, "must be a string path"))

    if violations:
        raise SchemaError(violations)
    return RunConfig(
        mode=mode, problem=problem, graph=graph, switching=switching,
        x0=x0, v0=v0, step_h=step_h, t_end=t_end, record_every=record_every,
        epsilon=epsilon, max_steps=max_steps, alpha=alpha, rows=rows,
        out_csv=out_csv, out_json=out_json, plot=plot,
    )


def config_to_dict(config: RunConfig) -> dict:
    """Canonical JSON-ready form; parse(serialize(c)) reproduces c."""
    out = {"mode": config.mode}
    if config.problem is not None:
        out["problem"] = {
            "H": [list(map(float, row)) for row in config.problem.rows],
            "z": [float(v) for v in config.problem.obs],
        }
    if config.graph is not None:
        out["graph"] = graph_to_dict(config.graph)
    if config.switching is not None:
        out["switching"] = {
            "period_T": config.switching.period_T,
            "graphs": [graph_to_dict(g) for g in config.switching.graphs],
        }
    if config.x0 is not None:
        out["x0"] = [float(v) for v in config.x0]
    if config.v0 is not None:
        out["v0"] = [float(v) for v in config.v0]
    out["step_h"] = config.step_h
    out["t_end"] = config.t_end
    out["record_every"] = config.record_every
    out["max_steps"] = config.max_steps
    if config.epsilon is not None:
        out["epsilon"] = config.epsilon
    if config.alpha:
        out["alpha"] = config.alpha
    if config.rows is not None:
        out["rows"] = [[family, n] for family, n in config.rows]
    if config.out_csv is not None:
        out["out_csv"] = config.out_csv
    if config.out_json is not None:
        out["out_json"] = config.out_json
    if config.plot is not None:
        plot = {"series": list(config.plot.series), "xlabel": config.plot.xlabel,
                "ylabel": config.plot.ylabel}
        if config.plot.path is not None:
            plot["path"] = config.plot.path
        out["plot"] = plot
    return out


def serialize_config(config: RunConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2, sort_keys=True)

"""JSON scenario files.

A scenario describes a system, an optional multiplier candidate and run
settings.  Expressions are strings in the expression grammar.

    {
      "schema_version": 1,
      "system": {"n": 2, "V": "...", "A": ["...", "..."]}
                | {"family": "n2" | "n3" | "sec5", "params": {...}},
      "candidate": {"g": [["...", ...], ...]} | {"csv": "file.csv"},
      "claims_constant": false,
      "window": {"t0": 0.0, "t1": 1.0, "h": 0.01},
      "tolerance": null, "samples": 20, "seed": 0,
      "lax": {"gamma": [[...]], "g0": [[...]]},
      "construct": {"mode": "prop3", "W": "...", "S": [[...]], "U": [[...]]}
                 | {"mode": "compose", "subsystems": [{...}], "lambdas": [...], "P": [[...]]}
    }
"""

import json
import os
from dataclasses import dataclass, field

from .expr import ParseError
from .model import EMSystem
from .paths import MatrixFunction, MatrixPath

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    data: dict
    base_dir: str = "."
    system: EMSystem = None
    candidate: object = None
    transform: object = None
    family: object = None
    settings: dict = field(default_factory=dict)

    @property
    def window(self):
        w = self.settings
        return w["t0"], w["t1"], w["h"]


_DEFAULTS = {"t0": 0.0, "t1": 1.0, "h": 1e-2, "tolerance": None, "samples": 20, "seed": 0}


def _require(cond, msg):
    if not cond:
        raise ScenarioError(msg)


def matrix_from_json(spec, base_dir=".", orthogonal=False):
    """A time matrix from nested expression strings/numbers or {"csv": file}."""
    if isinstance(spec, dict) and "csv" in spec:
        path = os.path.join(base_dir, spec["csv"])
        with open(path, newline="") as fh:
            return MatrixPath.from_csv(fh, orthogonal=spec.get("orthogonal", orthogonal))
    _require(isinstance(spec, list) and spec and all(isinstance(r, list) for r in spec),
             "matrix must be a list of rows")
    _require(len({len(r) for r in spec}) == 1, "matrix rows must have equal length")
    return MatrixFunction.from_expressions([[str(v) for v in row] for row in spec])


def system_from_json(spec):
    _require(isinstance(spec, dict), "system must be an object")
    for key in ("n", "V", "A"):
        _require(key in spec, f"system needs field {key!r}")
    n = spec["n"]
    _require(isinstance(n, int) and n >= 1, "system dimension must be a positive integer")
    _require(isinstance(spec["A"], list) and len(spec["A"]) == n,
             f"vector potential must list {n} expressions")
    return EMSystem(n, str(spec["V"]), [str(a) for a in spec["A"]], name=spec.get("name"))


def _build_family(sc, name, params):
    from . import paperlib

    if name == "n2":
        fam = paperlib.N2Family(**params)
        sys, g, P = paperlib.n2_build(fam)
        win = fam.safe_window(sc.settings["t0"], sc.settings["t1"])
        sys.window = win
        sc.family, sc.transform = fam, P
        return sys, g
    if name == "n3":
        pots = {k: params.pop(k) for k in ("U_pot", "Z_pot") if k in params}
        fam = paperlib.N3Family(window=(sc.settings["t0"], sc.settings["t1"]), **params)
        sys, g, P = paperlib.n3_build(fam, **pots)
        sc.family, sc.transform = fam, P
        return sys, g
    if name == "sec5":
        sys, g = paperlib.sec5_build(params.get("a", "1"), params.get("theta", "t"))
        sc.family = "sec5"
        return sys, g
    raise ScenarioError(f"unknown family {name!r}")


def load(source, overrides=None):
    """Parse a scenario from a path, JSON text or dict; ``overrides`` replace settings."""
    from .helmholtz import MultiplierCandidate

    base_dir = "."
    if isinstance(source, dict):
        data = source
    else:
        if os.path.exists(str(source)):
            base_dir = os.path.dirname(os.path.abspath(source))
            with open(source) as fh:
                text = fh.read()
        elif str(source).lstrip().startswith("{"):
            text = source
        else:
            raise ScenarioError(f"scenario file not found: {source}")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON: {exc}") from exc
    _require(isinstance(data, dict), "scenario must be a JSON object")
    version = data.get("schema_version")
    _require(version == SCHEMA_VERSION, f"unsupported schema_version {version!r}")
    sc = Scenario(data=data, base_dir=base_dir)
    window = data.get("window", {})
    sc.settings = {**_DEFAULTS, **{k: window[k] for k in ("t0", "t1", "h") if k in window}}
    for key in ("tolerance", "samples", "seed"):
        if key in data:
            sc.settings[key] = data[key]
    for key, value in (overrides or {}).items():
        if value is not None:
            sc.settings[key] = value
    _require(sc.settings["t1"] > sc.settings["t0"], "window needs t0 < t1")
    _require(sc.settings["h"] > 0, "grid step must be positive")
    try:
        g = None
        if "system" in data:
            spec = data["system"]
            if isinstance(spec, dict) and "family" in spec:
                sc.system, g = _build_family(sc, spec["family"], dict(spec.get("params", {})))
            else:
                sc.system = system_from_json(spec)
        if "candidate" in data:
            cand = data["candidate"]
            _require(isinstance(cand, dict) and ("g" in cand or "csv" in cand),
                     "candidate needs 'g' or 'csv'")
            g = matrix_from_json(cand.get("g", cand), base_dir)
        if g is not None:
            if not isinstance(g, MultiplierCandidate):
                g = MultiplierCandidate(g, claims_constant=bool(data.get("claims_constant", False)))
            if sc.system is not None:
                _require(g.n == sc.system.n, "candidate and system dimensions differ")
            sc.candidate = g
    except ParseError as exc:
        raise ScenarioError(f"expression error: {exc}") from exc
    return sc

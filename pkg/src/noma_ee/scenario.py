"""Scenario files: YAML with nested sections, validated into typed objects.

A scenario may also be read back from the comment header of a CSV this tool
wrote, which is how runs are replayed.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass

import numpy as np
import yaml

from .channel import EffectiveGain, Placement, SystemConfig
from .ee import AntennaBudget, InnerSolver, PowerModel
from .errors import ConfigError, NomaError
from .rates import PowerAllocation

HEADER_MAGIC = "# noma-ee"
CONFIG_BEGIN = "# config:"
CONFIG_END = "# end-config"
CONFIG_PREFIX = "#   "

SWEEP_AXES = {
    "K": ("system", int),
    "M": ("system", int),
    "R_D": ("system", float),
    "alpha": ("system", float),
    "rho": ("system", float),
    "eta": ("power", float),
    "P_c": ("power", float),
    "P_RF": ("power", float),
    "P_T": ("power", float),
    "N_0": ("power", float),
}
SWEEP_MODES = ("ergodic", "optimize")

# (key, type, default); a default of ... marks a required key
_SYSTEM = [("M", int, 1), ("K", int, ...), ("R_D", float, ...), ("alpha", float, ...),
           ("rho", float, ...), ("seed", int, 0), ("placement", str, "uniform_area"),
           ("effective_gain", str, "max")]
_POWER = [("eta", float, 1.0), ("P_c", float, 0.0), ("P_RF", float, 1.0),
          ("P_T", float, 1000.0), ("N_0", float, 1.0)]
_RUN = [("trials", int, 1000), ("gcq_nodes", int, 50), ("partitions", int, 8),
        ("ordered", bool, False), ("workers", int, 1), ("tolerance", float, 1e-8),
        ("max_iter", int, 50), ("inner", str, "bisection")]


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


class _Lines:
    """Maps dotted key paths to 1-based line numbers in the source text."""

    def __init__(self, text):
        self.lines = {}
        try:
            root = yaml.compose(text)
        except yaml.YAMLError:
            root = None
        if root is not None:
            self._walk(root, ())

    def _walk(self, node, path):
        if isinstance(node, yaml.MappingNode):
            self.lines.setdefault(path, node.start_mark.line + 1)
            for key, value in node.value:
                sub = path + (str(key.value),)
                self.lines[sub] = key.start_mark.line + 1
                self._walk(value, sub)

    def get(self, path):
        while path and path not in self.lines:
            path = path[:-1]
        return self.lines.get(path)


def extract_header_config(text):
    """Return the embedded YAML of a CSV written by this tool, else None."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith(HEADER_MAGIC):
        return None
    try:
        start = lines.index(CONFIG_BEGIN) + 1
        stop = lines.index(CONFIG_END, start)
    except ValueError:
        raise ConfigError("output header has no complete config block") from None
    return "\n".join(line[len(CONFIG_PREFIX):] for line in lines[start:stop]) + "\n"


def _coerce(value, typ, path, lines):
    name = ".".join(path)
    if typ is bool:
        if isinstance(value, bool):
            return value
    elif typ is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
    elif typ is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif typ is str:
        if isinstance(value, str):
            return value
    raise ConfigError(f"expected {typ.__name__}, got {value!r}", field=name, line=lines.get(path))


def _section(raw, name, spec, lines, required=True):
    if name not in raw or raw[name] is None:
        if required:
            raise ConfigError("missing section", field=name, line=lines.get(()))
        data = {}
    else:
        data = raw[name]
    if not isinstance(data, dict):
        raise ConfigError("expected a mapping", field=name, line=lines.get((name,)))
    known = {key for key, _, _ in spec}
    extra = set(data) - known - ({"sweep"} if name == "run" else set())
    if extra:
        key = sorted(extra)[0]
        raise ConfigError(f"unknown key (allowed: {', '.join(sorted(known))})",
                          field=f"{name}.{key}", line=lines.get((name, key)))
    out = {}
    for key, typ, default in spec:
        if key not in data or data[key] is None:
            if default is ...:
                raise ConfigError("required field is missing", field=key,
                                  line=lines.get((name,)))
            out[key] = default
        else:
            out[key] = _coerce(data[key], typ, (name, key), lines)
    return out


def _per_ue(value, K, path, lines):
    if isinstance(value, list):
        if len(value) != K:
            raise ConfigError(f"expected {K} entries, got {len(value)}", field=".".join(path),
                              line=lines.get(path))
        return [_coerce(v, int, path, lines) for v in value]
    return [_coerce(value, int, path, lines)] * K


def _resolve(raw, lines):
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a mapping at top level", line=1)
    extra = set(raw) - {"name", "system", "allocation", "power", "budget", "run"}
    if extra:
        key = sorted(extra)[0]
        raise ConfigError("unknown top-level key", field=key, line=lines.get((key,)))
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        raise ConfigError("scenario needs a non-empty string name", field="name",
                          line=lines.get(("name",)))
    system = _section(raw, "system", _SYSTEM, lines)
    K = system["K"]
    for key, enum_type in (("placement", Placement), ("effective_gain", EffectiveGain)):
        allowed = [e.value for e in enum_type]
        if system[key] not in allowed:
            raise ConfigError(f"must be one of {allowed}", field=f"system.{key}",
                              line=lines.get(("system", key)))

    alloc = raw.get("allocation", "linear")
    if isinstance(alloc, list):
        alloc = [_coerce(v, float, ("allocation",), lines) for v in alloc]
    elif alloc not in ("linear", "equal"):
        raise ConfigError("expected 'linear', 'equal' or a list of coefficients",
                          field="allocation", line=lines.get(("allocation",)))

    power = _section(raw, "power", _POWER, lines, required=False)

    budget_raw = raw.get("budget") or {}
    if not isinstance(budget_raw, dict):
        raise ConfigError("expected a mapping", field="budget", line=lines.get(("budget",)))
    budget_keys = {"N_bs_a", "N_bs_rf", "N_k_b_a", "N_k_c_ue", "N_k_c_rf"}
    extra = set(budget_raw) - budget_keys
    if extra:
        key = sorted(extra)[0]
        raise ConfigError("unknown key", field=f"budget.{key}", line=lines.get(("budget", key)))
    budget = {
        "N_bs_a": _coerce(budget_raw.get("N_bs_a", K), int, ("budget", "N_bs_a"), lines),
        "N_bs_rf": _coerce(budget_raw.get("N_bs_rf", K), int, ("budget", "N_bs_rf"), lines),
        "N_k_b_a": _per_ue(budget_raw.get("N_k_b_a", 1), K, ("budget", "N_k_b_a"), lines),
        "N_k_c_ue": _per_ue(budget_raw.get("N_k_c_ue", 1), K, ("budget", "N_k_c_ue"), lines),
    }
    rf = budget_raw.get("N_k_c_rf")
    budget["N_k_c_rf"] = (list(budget["N_k_b_a"]) if rf is None
                          else _per_ue(rf, K, ("budget", "N_k_c_rf"), lines))

    run = _section(raw, "run", _RUN, lines, required=False)
    if run["inner"] not in [e.value for e in InnerSolver]:
        raise ConfigError("must be 'bisection' or 'subgradient'", field="run.inner",
                          line=lines.get(("run", "inner")))
    sweep = (raw.get("run") or {}).get("sweep")
    run["sweep"] = None if sweep is None else _resolve_sweep(sweep, lines)
    return {"name": name, "system": system, "allocation": alloc, "power": power,
            "budget": budget, "run": run}


def _resolve_sweep(sweep, lines):
    path = ("run", "sweep")
    if not isinstance(sweep, dict):
        raise ConfigError("expected a mapping with axis, values, mode", field="run.sweep",
                          line=lines.get(path))
    axis = sweep.get("axis")
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {sorted(SWEEP_AXES)}",
                          field="run.sweep.axis", line=lines.get(path + ("axis",)))
    values = sweep.get("values")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep needs a non-empty list of values", field="run.sweep.values",
                          line=lines.get(path + ("values",)))
    typ = SWEEP_AXES[axis][1]
    values = [_coerce(v, typ, path + ("values",), lines) for v in values]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("sweep values must be strictly increasing", field="run.sweep.values",
                          line=lines.get(path + ("values",)))
    mode = sweep.get("mode", "ergodic")
    if mode not in SWEEP_MODES:
        raise ConfigError(f"mode must be one of {list(SWEEP_MODES)}", field="run.sweep.mode",
                          line=lines.get(path + ("mode",)))
    return {"axis": axis, "values": values, "mode": mode}


@dataclass(frozen=True)
class RunSettings:
    trials: int
    gcq_nodes: int
    partitions: int
    ordered: bool
    workers: int
    tolerance: float
    max_iter: int
    inner: str
    sweep: dict | None


@dataclass(frozen=True)
class Scenario:
    name: str
    system: SystemConfig
    rho_dB: float
    allocation: PowerAllocation
    power: PowerModel
    budget: AntennaBudget
    run: RunSettings
    resolved: dict

    @classmethod
    def from_resolved(cls, resolved):
        """Build typed objects from an already-resolved dict (invariants checked here)."""
        sysd = dict(resolved["system"])
        rho_dB = sysd.pop("rho")
        system = SystemConfig(rho=db_to_linear(rho_dB), **sysd)
        spec = resolved["allocation"]
        if spec == "linear":
            alloc = PowerAllocation.linear(system.K)
        elif spec == "equal":
            alloc = PowerAllocation.equal(system.K)
        else:
            alloc = PowerAllocation(np.array(spec, dtype=float))
            if alloc.K != system.K:
                raise ConfigError(f"{alloc.K} coefficients for K={system.K}", field="allocation")
        budget = resolved["budget"]
        return cls(
            name=resolved["name"],
            system=system,
            rho_dB=rho_dB,
            allocation=alloc,
            power=PowerModel(**resolved["power"]),
            budget=AntennaBudget(N_bs_a=budget["N_bs_a"], N_bs_rf=budget["N_bs_rf"],
                                 N_k_b_a=budget["N_k_b_a"], N_k_c_ue=budget["N_k_c_ue"],
                                 N_k_c_rf=budget["N_k_c_rf"]),
            run=RunSettings(**resolved["run"]),
            resolved=resolved,
        )

    def with_overrides(self, **overrides):
        """Copy with flat overrides, e.g. ``seed=3`` or ``trials=10``; None values are skipped."""
        resolved = copy.deepcopy(self.resolved)
        for key, value in overrides.items():
            if value is None:
                continue
            if key == "seed":
                resolved["system"]["seed"] = int(value)
            elif key in ("trials", "gcq_nodes", "partitions", "workers"):
                resolved["run"][key] = int(value)
            else:
                raise KeyError(key)
        return Scenario.from_resolved(resolved)

    def at(self, axis, value):
        """Copy with one sweep axis set to ``value``."""
        section, typ = SWEEP_AXES[axis]
        resolved = copy.deepcopy(self.resolved)
        resolved[section][axis] = typ(value)
        if axis == "K":
            K = int(value)
            if isinstance(resolved["allocation"], list):
                raise ConfigError("an explicit allocation vector cannot be swept over K",
                                  field="allocation")
            budget = resolved["budget"]
            for key in ("N_k_b_a", "N_k_c_ue", "N_k_c_rf"):
                budget[key] = (budget[key] * K)[:K] if budget[key] else [1] * K
            budget["N_bs_a"] = max(budget["N_bs_a"], sum(budget["N_k_b_a"]))
            budget["N_bs_rf"] = max(budget["N_bs_rf"], sum(budget["N_k_c_rf"]))
        resolved["run"]["sweep"] = None
        return Scenario.from_resolved(resolved)

    def to_yaml(self):
        return yaml.safe_dump(self.resolved, sort_keys=False, default_flow_style=None, width=1000)

    def digest(self):
        canonical = json.dumps(self.resolved, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def loads(text):
    embedded = extract_header_config(text)
    if embedded is not None:
        text = embedded
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", line=line) from None
    resolved = _resolve(raw, _Lines(text))
    try:
        return Scenario.from_resolved(resolved)
    except ConfigError:
        raise
    except NomaError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from None
    return loads(text)

"""Declarative experiment configs (TOML).

A config lists instances, algorithms, sizes and seeds; ``run`` executes
their Cartesian product.  Example::

    name = "bush-descent"
    sizes = [16, 32, 64]
    seeds = [0]

    [[instances]]
    kind = "bush"            # ramp | spike | bush | table

    [[algorithms]]
    kind = "BBSA"            # SA | LUSA | BBSA | QAO | QAOA
    protocol = "bush-descent"
    mode = "walkers"
    walkers = 20000

Every validation error names the offending key, e.g.
``algorithms[0].mode: expected one of ...``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..control import ControlPath, QaoaAngles, TemperatureSchedule, schedule_from_config
from ..landscape import BushCost, Cost, load_cost_table, make_ramp, make_spike

ALGORITHMS = ("SA", "LUSA", "BBSA", "QAO", "QAOA")
INSTANCE_KINDS = ("ramp", "spike", "bush", "table")
VERDICTS = ("succeeds-flat", "succeeds-poly", "fails-exp-trend")

# defaults per algorithm; anything not listed here is rejected
ALGO_KEYS: dict[str, dict[str, Any]] = {
    "SA": {"mode": "exact", "walkers": 2000, "tau0_per_n": 1.0, "tau_end": 0.05,
           "rounds": 50, "budget_per_n2": 50.0, "dt_times_n": 1.0, "schedule": None},
    "LUSA": {"mode": "exact", "walkers": 2000, "T": 10.0, "steps": 20, "dt": None, "schedule": None},
    "BBSA": {"mode": "exact", "walkers": 20000, "protocol": "bush-descent", "duration_factor": 1.2,
             "measure": "success", "threshold_exponent": 2.503, "t_max": 1e4,
             "diffuse_times_n": 2.0, "descent_offset": 4.0, "dt": None, "schedule": None},
    "QAO": {"measure": "gap", "T": 50.0, "steps": 64, "dt": None, "schedule": None, "precise": None},
    "QAOA": {"protocol": "ramp", "w_star": None, "angles": None},
}
ALGO_CHOICES = {
    "mode": ("exact", "walkers"),
    "protocol": ("bush-descent", "spike-hop", "schedule", "ramp", "theorem1", "angles"),
    "measure": ("success", "time-to-mass", "gap"),
}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class InstanceSpec:
    kind: str
    a: float | None = None
    b: float | None = None
    table: str | None = None
    lam: float | None = None  # Bush mixer weight; None means the canonical 1/(n+1)
    label: str = ""

    def build(self, n: int) -> Cost:
        if self.kind == "ramp":
            return make_ramp(n)
        if self.kind == "spike":
            return make_spike(n, self.a, self.b)
        if self.kind == "bush":
            return BushCost(n)
        cost = load_cost_table(self.table)
        if cost.n != n:
            raise ValueError(f"cost table {self.table} has n={cost.n}, not {n}")
        return cost

    def mixer_lambda(self, n: int) -> float:
        return 1.0 / (n + 1) if self.lam is None else self.lam


@dataclass(frozen=True)
class AlgorithmSpec:
    kind: str
    params: dict = field(default_factory=dict)
    label: str = ""
    exclude_sizes: tuple[int, ...] = ()

    def get(self, key: str):
        return self.params[key]


@dataclass(frozen=True)
class ReportSpec:
    flat_min: float = 0.2
    flat_spread: float = 0.05
    expected: dict = field(default_factory=dict)  # (instance label, algorithm label) -> verdict


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    instances: tuple[InstanceSpec, ...]
    algorithms: tuple[AlgorithmSpec, ...]
    sizes: tuple[int, ...]
    seeds: tuple[int, ...] = (0,)
    report: ReportSpec = ReportSpec()
    out: str | None = None
    format: str = "csv"
    include_timing: bool = False

    def cells(self):
        """(instance index, algorithm index, n, seed) in deterministic order."""
        for i, _ in enumerate(self.instances):
            for j, alg in enumerate(self.algorithms):
                for n in self.sizes:
                    if n in alg.exclude_sizes:
                        continue
                    for s in self.seeds:
                        yield i, j, n, s


def _num(v, path: str, lo: float | None = None, integer: bool = False, allow_inf: bool = False):
    if isinstance(v, str) and allow_inf and v.strip().lower() == "inf":
        return math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(path, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(path, f"must be >= {lo}, got {v!r}")
    return int(v) if integer else float(v)


def _reject_unknown(data: dict, allowed, path: str) -> None:
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown key")


def parse_instance(data: dict, path: str) -> InstanceSpec:
    if not isinstance(data, dict):
        raise ConfigError(path, "expected a table")
    _reject_unknown(data, ("kind", "a", "b", "table", "lambda", "label"), path)
    kind = data.get("kind")
    if kind not in INSTANCE_KINDS:
        raise ConfigError(f"{path}.kind", f"expected one of {INSTANCE_KINDS}, got {kind!r}")
    a = b = lam = None
    table = None
    if kind == "spike":
        for key in ("a", "b"):
            if key not in data:
                raise ConfigError(f"{path}.{key}", "required for spike instances")
        a = _num(data["a"], f"{path}.a", lo=0.0)
        b = _num(data["b"], f"{path}.b", lo=0.0)
        if a > 1 or b > 1:
            raise ConfigError(path, "spike exponents must lie in [0, 1]")
    if kind == "table":
        if "table" not in data:
            raise ConfigError(f"{path}.table", "required for table instances")
        table = str(data["table"])
        if not Path(table).exists():
            raise ConfigError(f"{path}.table", f"no such file {table!r}")
    if "lambda" in data:
        if kind != "bush":
            raise ConfigError(f"{path}.lambda", "only Bush instances take a mixer weight")
        if data["lambda"] != "canonical":
            lam = _num(data["lambda"], f"{path}.lambda")
            if not lam > 0:
                raise ConfigError(f"{path}.lambda", "must be positive")
    label = data.get("label") or _default_label(kind, a, b, lam, table)
    return InstanceSpec(kind, a, b, table, lam, str(label))


def _default_label(kind, a, b, lam, table) -> str:
    if kind == "spike":
        return f"spike-{a:g}-{b:g}"
    if kind == "bush":
        return "bush" if lam is None else f"bush-lambda-{lam:g}"
    if kind == "table":
        return f"table-{Path(table).stem}"
    return kind


def parse_algorithm(data: dict, path: str) -> AlgorithmSpec:
    if not isinstance(data, dict):
        raise ConfigError(path, "expected a table")
    kind = data.get("kind")
    if kind not in ALGORITHMS:
        raise ConfigError(f"{path}.kind", f"expected one of {ALGORITHMS}, got {kind!r}")
    defaults = ALGO_KEYS[kind]
    _reject_unknown(data, ("kind", "label", "exclude_sizes", *defaults), path)
    params = dict(defaults)
    for key, value in data.items():
        if key in ("kind", "label", "exclude_sizes"):
            continue
        kp = f"{path}.{key}"
        if key in ALGO_CHOICES:
            if value not in ALGO_CHOICES[key]:
                raise ConfigError(kp, f"expected one of {ALGO_CHOICES[key]}, got {value!r}")
        elif key == "schedule":
            try:
                schedule_from_config(value)
            except (ValueError, TypeError, KeyError) as err:
                raise ConfigError(kp, str(err)) from None
        elif key == "angles":
            try:
                QaoaAngles.from_config(value)
            except (ValueError, TypeError, KeyError) as err:
                raise ConfigError(kp, str(err)) from None
        elif key == "walkers":
            value = _num(value, kp, lo=0, integer=True)
        elif key in ("rounds", "steps", "w_star"):
            value = _num(value, kp, lo=0 if key == "w_star" else 1, integer=True)
        elif key == "precise":
            if not isinstance(value, bool):
                raise ConfigError(kp, "expected true or false")
        else:
            value = _num(value, kp, lo=0.0, allow_inf=key == "t_max")
        params[key] = value
    _check_algorithm(kind, params, path)
    label = str(data.get("label") or _algo_label(kind, params))
    excl = data.get("exclude_sizes", [])
    if not isinstance(excl, list):
        raise ConfigError(f"{path}.exclude_sizes", "expected a list of sizes")
    excl = tuple(_num(x, f"{path}.exclude_sizes[{k}]", integer=True) for k, x in enumerate(excl))
    return AlgorithmSpec(kind, params, label, excl)


def _check_algorithm(kind: str, params: dict, path: str) -> None:
    protocol = params.get("protocol")
    if kind == "BBSA":
        if protocol not in ("bush-descent", "spike-hop", "schedule"):
            raise ConfigError(f"{path}.protocol", "BBSA protocols are bush-descent, spike-hop, schedule")
        if protocol == "schedule":
            if params["schedule"] is None:
                raise ConfigError(f"{path}.schedule", "required by protocol 'schedule'")
            if not isinstance(schedule_from_config(params["schedule"]), ControlPath):
                raise ConfigError(f"{path}.schedule", "BBSA needs a control path")
        if params["measure"] == "gap":
            raise ConfigError(f"{path}.measure", "gap is a QAO measure")
    if kind == "QAOA":
        if protocol not in ("ramp", "theorem1", "angles"):
            raise ConfigError(f"{path}.protocol", "QAOA protocols are ramp, theorem1, angles")
        if protocol == "angles" and params["angles"] is None:
            raise ConfigError(f"{path}.angles", "required by protocol 'angles'")
        if protocol == "theorem1" and params["w_star"] is None:
            raise ConfigError(f"{path}.w_star", "required by protocol 'theorem1'")
    if kind == "QAO" and params["measure"] not in ("gap", "success"):
        raise ConfigError(f"{path}.measure", "QAO measures are gap and success")
    if kind == "SA" and params["schedule"] is not None:
        if not isinstance(schedule_from_config(params["schedule"]), TemperatureSchedule):
            raise ConfigError(f"{path}.schedule", "SA needs a temperature schedule")
    if kind in ("LUSA", "QAO") and params["schedule"] is not None:
        if not isinstance(schedule_from_config(params["schedule"]), ControlPath):
            raise ConfigError(f"{path}.schedule", f"{kind} needs a control path")


def _algo_label(kind: str, params: dict) -> str:
    if kind == "BBSA":
        return f"BBSA-{params['protocol']}"
    if kind == "QAOA":
        return f"QAOA-{params['protocol']}"
    if kind == "QAO":
        return f"QAO-{params['measure']}"
    return kind


def parse_report(data: dict, path: str = "report") -> ReportSpec:
    if not isinstance(data, dict):
        raise ConfigError(path, "expected a table")
    _reject_unknown(data, ("flat_min", "flat_spread", "expected"), path)
    expected = {}
    for k, row in enumerate(data.get("expected", [])):
        kp = f"{path}.expected[{k}]"
        if not (isinstance(row, list) and len(row) == 3):
            raise ConfigError(kp, "expected [instance label, algorithm label, verdict]")
        if row[2] not in VERDICTS:
            raise ConfigError(kp, f"verdict must be one of {VERDICTS}")
        expected[(row[0], row[1])] = row[2]
    return ReportSpec(
        flat_min=_num(data.get("flat_min", 0.2), f"{path}.flat_min", lo=0.0),
        flat_spread=_num(data.get("flat_spread", 0.05), f"{path}.flat_spread", lo=0.0),
        expected=expected,
    )


def parse_config(data: dict) -> ExperimentConfig:
    _reject_unknown(data, ("name", "instances", "algorithms", "sizes", "seeds", "report",
                           "out", "format", "include_timing"), "")
    for key in ("instances", "algorithms"):
        if not isinstance(data.get(key), list) or not data[key]:
            raise ConfigError(key, "expected a non-empty array of tables")
    sizes = data.get("sizes", [])
    if not isinstance(sizes, list):
        raise ConfigError("sizes", "expected a list of integers")
    sizes = tuple(_num(n, f"sizes[{k}]", lo=1, integer=True) for k, n in enumerate(sizes))
    seeds = data.get("seeds", [0])
    if not isinstance(seeds, list):
        raise ConfigError("seeds", "expected a list of integers")
    seeds = tuple(_num(s, f"seeds[{k}]", lo=0, integer=True) for k, s in enumerate(seeds))
    instances = tuple(parse_instance(d, f"instances[{k}]") for k, d in enumerate(data["instances"]))
    algorithms = tuple(parse_algorithm(d, f"algorithms[{k}]") for k, d in enumerate(data["algorithms"]))
    for k, inst in enumerate(instances):
        if inst.kind == "spike" and any(n < 4 for n in sizes):
            raise ConfigError(f"instances[{k}]", "spike instances need every size >= 4")
        for j, alg in enumerate(algorithms):
            if inst.kind == "bush" and alg.kind == "QAOA" and alg.params["protocol"] == "theorem1":
                raise ConfigError(f"algorithms[{j}].protocol", "theorem1 needs a symmetric cost")
    fmt = data.get("format", "csv")
    if fmt not in ("csv", "jsonl"):
        raise ConfigError("format", "expected csv or jsonl")
    return ExperimentConfig(
        name=str(data.get("name", "experiment")),
        instances=instances,
        algorithms=algorithms,
        sizes=sizes,
        seeds=seeds,
        report=parse_report(data.get("report", {})),
        out=data.get("out"),
        format=fmt,
        include_timing=bool(data.get("include_timing", False)),
    )


def read_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as err:
        raise ConfigError("", f"cannot read {path}: {err}") from None
    except tomllib.TOMLDecodeError as err:
        raise ConfigError("", f"{path}: {err}") from None


def load_config(path) -> ExperimentConfig:
    return parse_config(read_toml(path))

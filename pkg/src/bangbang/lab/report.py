"""Trend verdicts per (instance, algorithm) pair.

Desk-scale sweeps cannot prove asymptotics, so each pair is classified
from its sweep:

* ``succeeds-flat``: success stays above ``flat_min`` and varies by at
  most ``flat_spread`` over the sizes;
* ``fails-exp-trend``: the metric moves the wrong way (success or gap
  shrinking, time growing) and an exponential fits it better than a power
  law; a success or gap that collapses to zero, or a time that never
  arrives, also counts;
* ``succeeds-poly``: everything else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig, ReportSpec
from .fitting import exp_beats_power, fit_xy
from .runner import ResultRow, run


@dataclass(frozen=True)
class ReportLine:
    instance: str
    algorithm: str
    metric: str
    sizes: tuple[int, ...]
    values: tuple[float, ...]
    verdict: str
    expected: str
    detail: str

    @property
    def agrees(self) -> bool | None:
        return None if not self.expected else self.expected == self.verdict


def _pick_metric(rows: list[ResultRow]) -> str:
    if any(not math.isnan(r.time_to_mass) for r in rows):
        return "time_to_mass"
    if any(not math.isnan(r.min_gap) for r in rows):
        return "min_gap"
    return "success"


def _mean_by_n(rows: list[ResultRow], metric: str):
    ns = sorted({r.n for r in rows})
    vals = [float(np.mean([getattr(r, metric) for r in rows if r.n == n])) for n in ns]
    return np.array(ns, dtype=float), np.array(vals)


def classify(ns, values, metric: str, spec: ReportSpec = ReportSpec()) -> tuple[str, str]:
    """(verdict, human-readable reason) for one sweep."""
    ns = np.asarray(ns, dtype=float)
    v = np.asarray(values, dtype=float)
    if metric == "success" and v.size and v.min() >= spec.flat_min and np.ptp(v) <= spec.flat_spread:
        return "succeeds-flat", f"success in [{v.min():.3g}, {v.max():.3g}]"
    if metric == "time_to_mass" and np.any(~np.isfinite(v)):
        return "fails-exp-trend", "threshold never reached"
    if metric != "time_to_mass" and v.size and v[-1] <= 0:
        return "fails-exp-trend", f"{metric} reached zero"
    if v.size < 3 or np.any(v <= 0):
        return "succeeds-poly", "too few positive points to fit a trend"
    adverse = fit_xy(ns, v, "linear").slope
    adverse = adverse > 0 if metric == "time_to_mass" else adverse < 0
    exp = fit_xy(ns, v, "exp")
    power = fit_xy(ns, v, "power")
    reason = f"exp sse {exp.sse:.3g} vs power sse {power.sse:.3g}"
    if adverse and exp_beats_power(ns, v):
        return "fails-exp-trend", reason
    return "succeeds-poly", reason


def table1_report(config: ExperimentConfig, rows: list[ResultRow] | None = None,
                  threads: int = 1) -> list[ReportLine]:
    """Run (or reuse ``rows`` of) ``config`` and classify every pair."""
    rows = run(config, threads) if rows is None else rows
    out = []
    for inst in config.instances:
        for alg in config.algorithms:
            sel = [r for r in rows if r.instance == inst.label and r.algorithm == alg.label]
            if not sel:
                continue
            metric = _pick_metric(sel)
            ns, vals = _mean_by_n(sel, metric)
            verdict, detail = classify(ns, vals, metric, config.report)
            out.append(ReportLine(
                instance=inst.label,
                algorithm=alg.label,
                metric=metric,
                sizes=tuple(int(n) for n in ns),
                values=tuple(float(x) for x in vals),
                verdict=verdict,
                expected=config.report.expected.get((inst.label, alg.label), ""),
                detail=detail,
            ))
    return out


def format_report(lines: list[ReportLine]) -> str:
    head = ("instance", "algorithm", "metric", "verdict", "expected", "detail")
    body = [(l.instance, l.algorithm, l.metric, l.verdict, l.expected or "-", l.detail) for l in lines]
    widths = [max(len(str(r[k])) for r in [head, *body]) for k in range(len(head))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    return "\n".join(fmt.format(*r) for r in [head, *body])

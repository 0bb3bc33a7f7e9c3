"""Execute experiment cells and collect result rows."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .. import classical, quantum
from ..control import (
    ControlPath,
    QaoaAngles,
    bbsa_two_phase,
    digest,
    geometric_cooling,
    linear_anneal_path,
    schedule_from_config,
)
from ..landscape import BushCost, SymmetricCost, minima_indices
from .config import AlgorithmSpec, ExperimentConfig, InstanceSpec

RAMP_ANGLES = QaoaAngles((math.pi / 4,), (math.pi / 2,))
NAN = math.nan


@dataclass
class ResultRow:
    instance: str
    algorithm: str
    n: int
    seed: int
    schedule_digest: str
    success: float
    min_gap: float = NAN
    u_star: float = NAN
    q_bound: float = NAN
    survival_fraction: float = NAN
    mean_moves: float = NAN
    time_to_mass: float = NAN
    wall_time: float = NAN

    def as_dict(self, include_timing: bool = False) -> dict:
        d = asdict(self)
        if not include_timing:
            d.pop("wall_time")
        return d


FIELDS = [f for f in ResultRow.__dataclass_fields__]


# ---------------------------------------------------------------------------
# n-dependent protocols
# ---------------------------------------------------------------------------


def bush_descent_path(n: int, dt: float, factor: float = 1.2) -> ControlPath:
    """Pure descent for ``factor`` times the expected-moves bound."""
    return bbsa_two_phase(factor * classical.bush_moves_bound(n, dt) * dt, 0.0, 0.0)


def spike_hop_path(n: int, diffuse_times_n: float = 2.0, offset: float = 4.0) -> ControlPath:
    """Descend to the barrier, diffuse for ``diffuse_times_n / n`` to hop it, descend again."""
    t = 2.0 * math.log(n) + offset
    return bbsa_two_phase(t, diffuse_times_n / n, t)


def sa_schedule(n: int, p: dict):
    """Geometric cooling from tau0_per_n * n to tau_end with a budget of budget_per_n2 * n^2 steps."""
    if p["schedule"] is not None:
        return schedule_from_config(p["schedule"])
    rounds = int(p["rounds"])
    tau0 = p["tau0_per_n"] * n
    ratio = (p["tau_end"] / tau0) ** (1.0 / max(rounds - 1, 1))
    steps = max(1, int(round(p["budget_per_n2"] * n * n / rounds)))
    return geometric_cooling(tau0, min(ratio, 1.0), rounds, steps)


def _classical_run(cost, schedule, p: dict, dt: float, seed: int, threads: int, analysis: bool = False):
    """Success probability (exact) or fraction (walkers) at the end of ``schedule``."""
    basis = cost.natural_basis()
    if p["mode"] == "walkers":
        stats = classical.run_walkers(cost, schedule, p["walkers"], dt=dt, seed=seed,
                                      analysis=analysis, threads=threads)
        return stats.success_fraction, stats
    dist = classical.ProbDist.uniform(basis)
    if isinstance(schedule, ControlPath):
        for u, dur in schedule.pieces:
            dist = classical.evolve_dist(dist, classical.linear_update_generator(cost, basis, u), dur, dt)
    else:
        for tau, steps in schedule.rounds:
            dist = classical.evolve_dist(dist, classical.metropolis_generator(cost, basis, tau), steps * dt, dt)
    return dist.mass(minima_indices(cost, basis)), None


def run_cell(inst: InstanceSpec, alg: AlgorithmSpec, n: int, seed: int, threads: int = 1) -> ResultRow:
    cost = inst.build(n)
    p = alg.params
    row = dict(instance=inst.label, algorithm=alg.label, n=n, seed=seed)
    t0 = time.perf_counter()
    extras: dict = {}

    if alg.kind == "SA":
        sched = sa_schedule(n, p)
        success, _ = _classical_run(cost, sched, p, p["dt_times_n"] / n, seed, threads)
    elif alg.kind == "LUSA":
        sched = schedule_from_config(p["schedule"]) if p["schedule"] else linear_anneal_path(p["T"], p["steps"])
        success, _ = _classical_run(cost, sched, p, p["dt"], seed, threads)
    elif alg.kind == "BBSA":
        dt = p["dt"] or classical.default_dt(cost.natural_basis())
        if p["protocol"] == "bush-descent":
            sched = bush_descent_path(n, dt, p["duration_factor"])
        elif p["protocol"] == "spike-hop":
            sched = spike_hop_path(n, p["diffuse_times_n"], p["descent_offset"])
        else:
            sched = schedule_from_config(p["schedule"])
        if p["measure"] == "time-to-mass":
            basis = cost.natural_basis()
            gen = classical.descent_generator(cost, basis)
            t = classical.time_to_mass(classical.ProbDist.uniform(basis), gen, minima_indices(cost, basis),
                                       n ** -p["threshold_exponent"], dt, p["t_max"])
            extras["time_to_mass"] = t
            success = NAN
        else:
            analysis = isinstance(cost, BushCost)
            success, stats = _classical_run(cost, sched, p, dt, seed, threads, analysis=analysis)
            if stats is not None and analysis:
                extras["survival_fraction"] = stats.survival_fraction
                extras["mean_moves"] = stats.mean_moves
    elif alg.kind == "QAOA":
        if p["protocol"] == "ramp":
            angles = RAMP_ANGLES
        elif p["protocol"] == "theorem1":
            angles = quantum.theorem1_angles(cost, int(p["w_star"]))
        else:
            angles = QaoaAngles.from_config(p["angles"])
        sched = angles
        mixer = quantum.mixer_lambda(n, inst.mixer_lambda(n)) if isinstance(cost, BushCost) else None
        res = quantum.qaoa_run(cost, angles, mixer)
        success = res.success
        if isinstance(cost, SymmetricCost) and angles.p == 1:
            extras["q_bound"] = quantum.weak_overlap_q(
                quantum.plus_state(cost.natural_basis()), cost.pert_part, angles.gammas[0])
    elif alg.kind == "QAO":
        mixer = quantum.mixer_lambda(n, inst.mixer_lambda(n)) if isinstance(cost, BushCost) else None
        if p["measure"] == "gap":
            sched = {"gap-scan": "default-grid"}
            scan = quantum.spectral_gap_scan(cost, mixer, precise=p["precise"])
            extras["min_gap"], extras["u_star"] = scan.min_gap, scan.u_star
            success = NAN
        else:
            sched = schedule_from_config(p["schedule"]) if p["schedule"] else linear_anneal_path(p["T"], p["steps"])
            success = quantum.qao_evolve(cost, sched, mixer, p["dt"]).success
    else:  # pragma: no cover - rejected by the config parser
        raise ValueError(alg.kind)

    return ResultRow(schedule_digest=digest(sched), success=float(success),
                     wall_time=time.perf_counter() - t0, **row, **extras)


def run(config: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    """Run every cell; rows come back in (instance, algorithm, n, seed) order.

    Cells are spread over ``threads`` workers; walker ensembles inside a
    cell stay single-threaded so their output does not depend on the pool.
    """
    cells = list(config.cells())

    def job(cell):
        i, j, n, s = cell
        return run_cell(config.instances[i], config.algorithms[j], n, s)

    if threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(job, cells))
    if len(cells) == 1:
        i, j, n, s = cells[0]
        return [run_cell(config.instances[i], config.algorithms[j], n, s, threads)]
    return [job(c) for c in cells]


def rows_where(rows, **match) -> list[ResultRow]:
    return [r for r in rows if all(getattr(r, k) == v for k, v in match.items())]


def column(rows, name: str) -> np.ndarray:
    return np.array([getattr(r, name) if not isinstance(r, dict) else r[name] for r in rows], dtype=float)

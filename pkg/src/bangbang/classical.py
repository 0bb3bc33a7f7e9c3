"""Classical Markov dynamics on reduced bases: SA, linear-update SA and BBSA.

Convention: a generator ``Q`` has non-negative off-diagonal entries
``Q[i, j]`` (rate of moving from state ``j`` into state ``i``) and columns
summing to zero.  Distributions evolve as ``dP/dt = Q P`` and a discrete
step of size ``dt`` is the stochastic matrix ``I + Q dt``.

In a lumped basis each edge rate is the single-flip acceptance times the
number of strings-neighbours the edge class stands for, which is exact for
permutation-symmetric costs and initial distributions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .control import ControlPath, TemperatureSchedule
from .landscape import (
    Basis,
    ConditionalHamming,
    Cost,
    edge_classes,
    minima_indices,
    uniform_weights,
)

EXACT_MAX_DIM = 4096
# (e / (e - 1))**2, rounded as in the published expected-moves bound
BUSH_MOVES_CONSTANT = 2.503
WALKER_BLOCK = 4096


@dataclass(frozen=True, eq=False)
class MarkovGenerator:
    basis: Basis
    rates: sp.csr_matrix

    @property
    def dim(self) -> int:
        return self.rates.shape[0]

    def dense(self) -> np.ndarray:
        return self.rates.toarray()

    def column_sums(self) -> np.ndarray:
        return np.asarray(self.rates.sum(axis=0)).ravel()

    def max_outflow(self) -> float:
        d = self.rates.diagonal()
        return float(-d.min()) if d.size else 0.0


@dataclass(frozen=True, eq=False)
class ProbDist:
    basis: Basis
    probs: np.ndarray

    @classmethod
    def uniform(cls, basis: Basis) -> "ProbDist":
        """Uniform distribution over all bit strings, expressed in ``basis``."""
        return cls(basis, uniform_weights(basis))

    @classmethod
    def point(cls, basis: Basis, index: int) -> "ProbDist":
        p = np.zeros(basis.dim)
        p[index] = 1.0
        return cls(basis, p)

    def mass(self, indices) -> float:
        return float(self.probs[np.asarray(indices, dtype=int)].sum())

    def total(self) -> float:
        return float(self.probs.sum())


def acceptance(delta, tau: float) -> np.ndarray:
    """Metropolis acceptance min(1, exp(-delta / tau)) with tau in [0, inf]."""
    delta = np.asarray(delta, dtype=float)
    if tau < 0 or math.isnan(tau):
        raise ValueError(f"temperature must be >= 0, got {tau}")
    if math.isinf(tau):
        return np.ones_like(delta)
    if tau == 0:
        return (delta <= 0).astype(float)
    return np.exp(-np.maximum(delta, 0.0) / tau)


def _assemble(basis: Basis, src, dst, rates) -> MarkovGenerator:
    d = basis.dim
    keep = rates != 0
    off = sp.coo_matrix((rates[keep], (dst[keep], src[keep])), shape=(d, d)).tocsr()
    outflow = np.asarray(off.sum(axis=0)).ravel()
    q = (off - sp.diags(outflow)).tocsr()
    q.sum_duplicates()
    return MarkovGenerator(basis, q)


def _edges_and_deltas(cost: Cost | None, basis: Basis):
    edges = edge_classes(basis)
    if cost is None:
        return edges, np.zeros(edges.src.size)
    v = cost.on(basis)
    return edges, v[edges.dst] - v[edges.src]


def metropolis_generator(cost: Cost, basis: Basis | None = None, tau: float = math.inf) -> MarkovGenerator:
    """Continuous-time Metropolis generator H(tau) on ``basis``."""
    basis = basis or cost.natural_basis()
    edges, delta = _edges_and_deltas(cost, basis)
    return _assemble(basis, edges.src, edges.dst, edges.mult * acceptance(delta, tau))


def diffusion_generator(basis: Basis) -> MarkovGenerator:
    """Infinite-temperature walk: every neighbour move has rate 1."""
    edges = edge_classes(basis)
    return _assemble(basis, edges.src, edges.dst, edges.mult.copy())


def descent_generator(cost: Cost, basis: Basis | None = None) -> MarkovGenerator:
    """Zero-temperature walk (randomized gradient descent); ties are accepted."""
    return metropolis_generator(cost, basis, tau=0.0)


def linear_update_generator(cost: Cost, basis: Basis | None = None, u: float = 0.0) -> MarkovGenerator:
    """u D + (1 - u) G: downhill moves at rate 1, uphill moves at rate u."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"control u must lie in [0, 1], got {u}")
    basis = basis or cost.natural_basis()
    d = diffusion_generator(basis).rates
    g = descent_generator(cost, basis).rates
    return MarkovGenerator(basis, (u * d + (1.0 - u) * g).tocsr())


def _n_steps(time: float, dt: float) -> int:
    return max(1, math.ceil(time / dt - 1e-9))


def _check_dt(gen: MarkovGenerator, dt: float) -> None:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt * gen.max_outflow() > 1.0 + 1e-12:
        raise ValueError(
            f"dt={dt} too large: step matrix I + Q dt has negative entries "
            f"(max outflow {gen.max_outflow()})"
        )


def default_dt(basis: Basis) -> float:
    """1 / (max neighbour count + 1): every step matrix is stochastic."""
    return 1.0 / (diffusion_generator(basis).max_outflow() + 1.0)


def evolve_dist(
    p0: ProbDist, gen: MarkovGenerator, time: float, dt: float | None = None, exact: bool = False
) -> ProbDist:
    """Evolve a distribution for ``time`` under ``gen``.

    Step mode applies ``ceil(time / dt)`` equal steps of ``I + Q h`` with
    ``h = time / N <= dt``.  Exact mode uses the matrix exponential.
    """
    if p0.basis != gen.basis:
        raise ValueError("distribution and generator live on different bases")
    if time < 0:
        raise ValueError("time must be non-negative")
    if time == 0:
        return ProbDist(p0.basis, p0.probs.copy())
    if exact:
        if gen.dim > EXACT_MAX_DIM:
            raise ValueError(f"exact mode limited to dimension {EXACT_MAX_DIM}, got {gen.dim}")
        p = expm_multiply(gen.rates * time, p0.probs)
        p = np.clip(p, 0.0, None)
        return ProbDist(p0.basis, p / p.sum())
    dt = dt or default_dt(gen.basis)
    _check_dt(gen, dt)
    n = _n_steps(time, dt)
    h = time / n
    q = gen.rates
    p = p0.probs.astype(float).copy()
    for _ in range(n):
        p = p + h * (q @ p)
    return ProbDist(p0.basis, p / p.sum())


def time_to_mass(
    p0: ProbDist,
    gen: MarkovGenerator,
    targets,
    threshold: float,
    dt: float | None = None,
    t_max: float = math.inf,
) -> float:
    """First time (on the ``dt`` grid) at which the mass on ``targets`` reaches ``threshold``.

    Returns ``inf`` if it does not happen before ``t_max``.
    """
    dt = dt or default_dt(gen.basis)
    _check_dt(gen, dt)
    targets = np.asarray(targets, dtype=int)
    p = p0.probs.astype(float).copy()
    q = gen.rates
    k = 0
    while p[targets].sum() < threshold:
        if (k + 1) * dt > t_max:
            return math.inf
        p = p + dt * (q @ p)
        k += 1
    return k * dt


def bush_moves_bound(n: float, dt: float) -> float:
    """Upper bound (2.503 / dt) ln n on the expected moves of a surviving Bush walker."""
    if not 0 < dt <= 1:
        raise ValueError("dt must lie in (0, 1]")
    return BUSH_MOVES_CONSTANT / dt * math.log(n)


# ---------------------------------------------------------------------------
# Walker ensembles
# ---------------------------------------------------------------------------


def walker_stream(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream for walker block ``block``.

    Philox keyed by the 64-bit seed; the block index occupies the top word
    of the 256-bit counter, so blocks never overlap.
    """
    key = int(seed) & (2**64 - 1)
    return np.random.Generator(np.random.Philox(key=key, counter=int(block) << 192))


@dataclass
class WalkerStats:
    n_walkers: int
    final: np.ndarray
    success_count: int
    success_fraction: float
    min_cost: float
    survival_fraction: float
    hit_steps: np.ndarray
    mean_moves: float
    total_steps: int

    @property
    def has_walkers(self) -> bool:
        return self.n_walkers > 0


def _transition_table(gen: MarkovGenerator, h: float, frozen: np.ndarray | None):
    """Per-state targets and cumulative probabilities of one ``I + Q h`` step."""
    q = gen.rates.tocsc()
    d = gen.dim
    outs = []
    for j in range(d):
        lo, hi = q.indptr[j], q.indptr[j + 1]
        rows, vals = q.indices[lo:hi], q.data[lo:hi]
        mask = (rows != j) & (vals > 0)
        outs.append((rows[mask], vals[mask] * h))
    k = max(len(t) for t, _ in outs) + 1
    tgt = np.repeat(np.arange(d)[:, None], k, axis=1)
    cum = np.ones((d, k))
    for j, (t, pr) in enumerate(outs):
        if frozen is not None and frozen[j]:
            continue
        tgt[j, : t.size] = t
        cum[j, : t.size] = np.cumsum(pr)
    return tgt, cum


def _segments(cost: Cost, basis: Basis, schedule, dt: float):
    """Yield (generator, step size, number of steps) for each schedule piece."""
    cache: dict[float, MarkovGenerator] = {}
    if isinstance(schedule, TemperatureSchedule):
        for tau, steps in schedule.rounds:
            if tau not in cache:
                cache[tau] = metropolis_generator(cost, basis, tau)
            yield cache[tau], dt, steps
    elif isinstance(schedule, ControlPath):
        for u, dur in schedule.pieces:
            if u not in cache:
                cache[u] = linear_update_generator(cost, basis, u)
            n = _n_steps(dur, dt)
            yield cache[u], dur / n, n
    else:
        raise TypeError("walkers are driven by a TemperatureSchedule or ControlPath")


def dead_sector(basis: Basis) -> np.ndarray | None:
    """States a Bush-analysis walker dies in (the z0 = 1 sector)."""
    if isinstance(basis, ConditionalHamming):
        return np.arange(basis.dim) > basis.n
    return None


def run_walkers(
    cost: Cost,
    schedule: Union[ControlPath, TemperatureSchedule],
    n_walkers: int,
    dt: float | None = None,
    seed: int = 0,
    basis: Basis | None = None,
    initial: ProbDist | None = None,
    analysis: bool = False,
    threads: int = 1,
) -> WalkerStats:
    """Monte Carlo walkers sampling the same chain ``evolve_dist`` integrates.

    Walkers start from ``initial`` (default: uniform over strings).  With
    ``analysis=True`` on a Bush basis, walkers in the z0 = 1 sector are
    frozen and counted dead, and first hitting steps of the global minimum
    are recorded.  Results depend only on ``seed``, never on ``threads``.
    """
    basis = basis or cost.natural_basis()
    dt = dt or default_dt(basis)
    p0 = (initial or ProbDist.uniform(basis)).probs
    p0 = p0 / p0.sum()
    costs = cost.on(basis)
    is_min = np.zeros(basis.dim, bool)
    is_min[minima_indices(cost, basis)] = True
    frozen = dead_sector(basis) if analysis else None
    if analysis and frozen is None:
        raise ValueError("analysis mode needs a conditional Hamming (Bush) basis")

    plan = []
    for gen, h, steps in _segments(cost, basis, schedule, dt):
        _check_dt(gen, h)
        tgt, cum = _transition_table(gen, h, frozen)
        plan.append((tgt, cum, steps))
    total_steps = sum(s for _, _, s in plan)

    if n_walkers <= 0:
        return WalkerStats(0, np.empty(0, int), 0, math.nan, math.nan, math.nan,
                           np.empty(0, int), math.nan, total_steps)

    def run_block(b: int):
        m = min(WALKER_BLOCK, n_walkers - b * WALKER_BLOCK)
        rng = walker_stream(seed, b)
        pos = rng.choice(basis.dim, size=m, p=p0)
        hit = np.where(is_min[pos], 0, -1)
        step = 0
        for tgt, cum, steps in plan:
            for _ in range(steps):
                r = rng.random(m)
                k = (r[:, None] >= cum[pos]).sum(axis=1)
                pos = tgt[pos, k]
                step += 1
                if analysis:
                    hit[(hit < 0) & is_min[pos]] = step
        return pos, hit

    n_blocks = -(-n_walkers // WALKER_BLOCK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_block, range(n_blocks)))
    else:
        results = [run_block(b) for b in range(n_blocks)]
    final = np.concatenate([r[0] for r in results])
    hits = np.concatenate([r[1] for r in results])

    alive = ~frozen[final] if frozen is not None else np.ones(final.size, bool)
    success = is_min[final] & alive
    reached = hits >= 0 if analysis else np.zeros(final.size, bool)
    return WalkerStats(
        n_walkers=n_walkers,
        final=final,
        success_count=int(success.sum()),
        success_fraction=float(success.mean()),
        min_cost=float(costs[final].min()),
        survival_fraction=float(alive.mean()),
        hit_steps=hits if analysis else np.full(final.size, -1),
        mean_moves=float(hits[reached].mean()) if reached.any() else math.nan,
        total_steps=total_steps,
    )

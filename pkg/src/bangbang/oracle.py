"""Brute-force cross-checks on all 2**n strings (n <= 12).

Everything here is built string by string from bit flips, independently of
the lumped edge classes, and compared against the reduced-basis code after
aggregating by weight (classical) or projecting onto symmetric states
(quantum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from . import classical, quantum
from .control import ControlPath, QaoaAngles
from .landscape import (
    FULL_MAX_BITS,
    BushCost,
    ConditionalHamming,
    Cost,
    Full,
    Hamming,
    class_sizes,
    full_basis_for,
    make_custom,
)

CLASSICAL_TOL = 1e-9
QAOA_TOL = 1e-9
QAO_TOL = 1e-7


def full_costs(cost: Cost) -> np.ndarray:
    """Cost of every string, evaluated from its bits."""
    full = full_basis_for(cost)
    z = np.arange(full.dim)
    bits = (z[:, None] >> np.arange(full.nbits)) & 1
    if isinstance(cost, BushCost):
        z0, w = bits[:, 0], bits[:, 1:].sum(axis=1)
        return (z0 + w * (1 - z0)).astype(float)
    return np.asarray(cost.values)[bits.sum(axis=1)]


def class_index(cost: Cost) -> np.ndarray:
    """Reduced-basis index of every string."""
    full = full_basis_for(cost)
    z = np.arange(full.dim)
    bits = (z[:, None] >> np.arange(full.nbits)) & 1
    if isinstance(cost, BushCost):
        return bits[:, 0] * (cost.n + 1) + bits[:, 1:].sum(axis=1)
    return bits.sum(axis=1)


def full_metropolis(c: np.ndarray, nbits: int, tau: float | None = None, u: float | None = None) -> sp.csr_matrix:
    """Single-flip generator on strings: Metropolis at ``tau`` or linear update at ``u``."""
    dim = 1 << nbits
    z = np.arange(dim)
    rows, cols, vals = [], [], []
    for i in range(nbits):
        nb = z ^ (1 << i)
        delta = c[nb] - c[z]
        if u is not None:
            rate = np.where(delta <= 0, 1.0, u)
        elif tau == math.inf:
            rate = np.ones(dim)
        elif tau == 0:
            rate = (delta <= 0).astype(float)
        else:
            rate = np.minimum(1.0, np.exp(-delta / tau))
        rows.append(nb)
        cols.append(z)
        vals.append(rate)
    q = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)).tocsr()
    out = np.asarray(q.sum(axis=0)).ravel()
    return (q - sp.diags(out)).tocsr()


def full_qaoa(c: np.ndarray, nbits: int, angles: QaoaAngles, central_weight: float = 1.0) -> np.ndarray:
    """QAOA on the full register via single-qubit rotations exp(i beta X)."""
    psi = np.full(1 << nbits, (1 << nbits) ** -0.5, dtype=complex)
    for beta, gamma in zip(angles.betas, angles.gammas):
        psi = psi * np.exp(-1j * gamma * c)
        t = psi.reshape([2] * nbits)
        for q in range(nbits):
            b = beta * (central_weight if q == 0 else 1.0)
            u = np.array([[math.cos(b), 1j * math.sin(b)], [1j * math.sin(b), math.cos(b)]])
            # bit q of the integer label is axis nbits-1-q of the C-ordered tensor
            ax = nbits - 1 - q
            t = np.moveaxis(np.tensordot(u, t, axes=([1], [ax])), 0, ax)
        psi = t.reshape(-1)
    return psi


def full_mixer(nbits: int, central_weight: float = 1.0) -> sp.csr_matrix:
    dim = 1 << nbits
    z = np.arange(dim)
    rows = np.concatenate([z ^ (1 << i) for i in range(nbits)])
    cols = np.tile(z, nbits)
    vals = np.concatenate([np.full(dim, -(central_weight if i == 0 else 1.0)) for i in range(nbits)])
    return sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()


def full_qao(c: np.ndarray, nbits: int, path: ControlPath, central_weight: float = 1.0) -> np.ndarray:
    b = full_mixer(nbits, central_weight)
    cm = sp.diags(c).tocsr()
    psi = np.full(1 << nbits, (1 << nbits) ** -0.5, dtype=complex)
    for u, dur in path.pieces:
        psi = expm_multiply(-1j * dur * (u * b + (1 - u) * cm), psi)
    return psi


def project(psi: np.ndarray, cost: Cost) -> np.ndarray:
    """Amplitudes on the normalized symmetric states of the reduced basis."""
    basis = cost.natural_basis()
    out = np.zeros(basis.dim, dtype=complex)
    np.add.at(out, class_index(cost), psi)
    return out / np.sqrt(class_sizes(basis))


@dataclass(frozen=True)
class OracleCheck:
    name: str
    n: int
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.error <= self.tol


def check_classical(cost: Cost, time: float = 1.5) -> list[OracleCheck]:
    full = full_basis_for(cost)
    c = full_costs(cost)
    idx = class_index(cost)
    basis = cost.natural_basis()
    p_full = np.full(full.dim, 1.0 / full.dim)
    p_red = classical.ProbDist.uniform(basis)
    runs = [("tau", t) for t in (0.0, 0.7, math.inf)] + [("u", u) for u in (0.0, 0.5, 1.0)]
    out = []
    dt = 1.0 / (full.nbits + 1)
    for kind, val in runs:
        qf = full_metropolis(c, full.nbits, tau=val) if kind == "tau" else full_metropolis(c, full.nbits, u=val)
        if kind == "tau":
            gen = classical.metropolis_generator(cost, basis, val)
        else:
            gen = classical.linear_update_generator(cost, basis, val)
        agg_exact = np.bincount(idx, weights=expm_multiply(qf * time, p_full), minlength=basis.dim)
        red_exact = classical.evolve_dist(p_red, gen, time, exact=True).probs
        pf = p_full.copy()
        n_steps = math.ceil(time / dt - 1e-9)
        for _ in range(n_steps):
            pf = pf + (time / n_steps) * (qf @ pf)
        agg_step = np.bincount(idx, weights=pf, minlength=basis.dim)
        red_step = classical.evolve_dist(p_red, gen, time, dt).probs
        err = max(np.abs(agg_exact - red_exact).max(), np.abs(agg_step - red_step).max())
        out.append(OracleCheck(f"classical {kind}={val} {cost.describe()}", cost.n, float(err), CLASSICAL_TOL))
    return out


def check_qaoa(cost: Cost, angles: QaoaAngles, lam: float | None = None) -> OracleCheck:
    """Reduced QAOA against the full register; ``lam`` selects B_lambda for Bush."""
    full = full_basis_for(cost)
    mixer = quantum.mixer_lambda(cost.n, lam) if lam is not None else None
    weight = lam * (cost.n + 1) if lam is not None else 1.0
    psi = full_qaoa(full_costs(cost), full.nbits, angles, weight)
    red = quantum.qaoa_run(cost, angles, mixer).state.amps
    err = np.abs(project(psi, cost) - red).max()
    # the full state must also lie entirely in the symmetric subspace
    leak = abs(1.0 - np.sum(np.abs(project(psi, cost)) ** 2))
    return OracleCheck(f"qaoa p={angles.p} {cost.describe()}", cost.n, float(max(err, leak)), QAOA_TOL)


def check_theorem1(n: int, w_star: int) -> OracleCheck:
    cost = make_custom(np.arange(n + 1, dtype=float))
    res = quantum.theorem1_protocol(cost, w_star)
    psi = full_qaoa(full_costs(cost), n, quantum.theorem1_angles(cost, w_star))
    brute = float(np.sum(np.abs(psi[class_index(cost) == w_star]) ** 2))
    err = max(abs(brute - res.success), abs(brute - res.closed_form))
    return OracleCheck(f"theorem1 n={n} w*={w_star}", n, err, QAOA_TOL)


def check_qao(cost: Cost, path: ControlPath) -> OracleCheck:
    full = full_basis_for(cost)
    psi = full_qao(full_costs(cost), full.nbits, path)
    red = quantum.qao_evolve(cost, path).state.amps
    err = np.abs(project(psi, cost) - red).max()
    return OracleCheck(f"qao {cost.describe()}", cost.n, float(err), QAO_TOL)


def check_mixer_lambda(n: int, lam: float) -> OracleCheck:
    """B_lambda in the conditional Hamming basis against the weighted full mixer."""
    basis = ConditionalHamming(n)
    full = Full(n + 1)
    m = full_mixer(full.nbits, lam * (n + 1))
    cost = BushCost(n)
    idx = class_index(cost)
    z = np.arange(full.dim)
    # <a|M|b> between normalized class states = sum over members / sqrt(|a||b|)
    proj = sp.coo_matrix((np.ones(full.dim), (idx, z)), shape=(basis.dim, full.dim)).tocsr()
    sizes = np.sqrt(class_sizes(basis))
    red = (proj @ m @ proj.T).toarray() / np.outer(sizes, sizes)
    err = np.abs(red - quantum.mixer_lambda(n, lam).dense()).max()
    return OracleCheck(f"mixer_lambda n={n} lambda={lam}", n, float(err), QAOA_TOL)


def check_mixer_hamming(n: int) -> OracleCheck:
    basis = Hamming(n)
    m = full_mixer(n)
    z = np.arange(1 << n)
    idx = np.array([bin(x).count("1") for x in z])
    proj = sp.coo_matrix((np.ones(z.size), (idx, z)), shape=(basis.dim, z.size)).tocsr()
    sizes = np.sqrt(class_sizes(basis))
    red = (proj @ m @ proj.T).toarray() / np.outer(sizes, sizes)
    err = np.abs(red - quantum.mixer_hamming(n).dense()).max()
    return OracleCheck(f"mixer_hamming n={n}", n, float(err), QAOA_TOL)


def random_symmetric_cost(rng: np.random.Generator, n: int):
    """Random real cost table, half of them integer-valued to exercise ties."""
    if rng.random() < 0.5:
        vals = rng.integers(-3, 4, size=n + 1).astype(float)
    else:
        vals = rng.normal(size=n + 1)
    return make_custom(vals)


def run_oracle_suite(seed: int = 0, n_random: int = 20, max_n: int = FULL_MAX_BITS,
                     classical_time: float = 1.5, qao_time: float = 2.0) -> list[OracleCheck]:
    """Every brute-force equivalence check; returns one record per comparison."""
    rng = np.random.default_rng(seed)
    sizes = [3 + k % (max_n - 2) for k in range(n_random)]
    costs: list[Cost] = [random_symmetric_cost(rng, n) for n in sizes]
    costs += [BushCost(n) for n in (2, 5, max_n - 1)]
    checks: list[OracleCheck] = []
    for n in (1, 2, 5, max_n):
        checks.append(check_mixer_hamming(n))
    for n, lam in ((2, 1.0), (4, 0.5), (6, 1 / 7)):
        checks.append(check_mixer_lambda(n, lam))
    for n in (4, 7, max_n):
        checks.extend(check_theorem1(n, w) for w in range(n + 1))
    for n in (3, max_n - 1):
        angles = QaoaAngles(tuple(rng.uniform(-1, 1, 2)), tuple(rng.uniform(-3, 3, 2)))
        checks.append(check_qaoa(BushCost(n), angles, lam=1.0))
    for cost in costs:
        checks.extend(check_classical(cost, classical_time))
        for p in (1, 2, 3):
            angles = QaoaAngles(tuple(rng.uniform(-math.pi, math.pi, p)), tuple(rng.uniform(-math.pi, math.pi, p)))
            checks.append(check_qaoa(cost, angles))
        k = int(rng.integers(1, 5))
        us = np.sort(rng.uniform(0, 1, k))[::-1]
        path = ControlPath(tuple((float(u), qao_time / k) for u in us))
        checks.append(check_qao(cost, path))
    return checks

"""Exact quantum dynamics in permutation-symmetric bases.

States are amplitude vectors over normalized Dicke-like states (|w> on the
Hamming basis, |z0, w> on the conditional Hamming basis).  Conventions:

* mixer ``B = -sum_i X_i`` and mixer rotation ``exp(-i beta B)``;
* phase rotation ``exp(-i gamma C)`` with ``C`` diagonal;
* a QAOA round applies the phase rotation first, then the mixer;
* QAO evolves under ``H(u) = u B + (1 - u) C`` from the mixer ground state.

In the Hamming basis ``<w+1|B|w> = -sqrt((w+1)(n-w))``.  The Bush family
``B_lambda`` weights the central-bit flip by ``lambda (n+1)``; ``lambda =
1/(n+1)`` is the ordinary transverse field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eig_banded, eigh, eigh_tridiagonal
from scipy.optimize import minimize_scalar
from scipy.sparse.csgraph import reverse_cuthill_mckee
from scipy.sparse.linalg import expm_multiply
from scipy.special import xlogy

from . import _precise
from .control import ControlPath, QaoaAngles, linear_anneal_path
from .landscape import (
    Basis,
    ConditionalHamming,
    Cost,
    Full,
    Hamming,
    SymmetricCost,
    edge_classes,
    log_binom,
    minima_indices,
    uniform_weights,
)

HERMITIAN_TOL = 1e-12
DEGENERATE_GAP = 1e-12
# below this the double-precision gap is refined in extended precision
PRECISE_GAP = 1e-7


@dataclass(frozen=True, eq=False)
class ReducedState:
    basis: Basis
    amps: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probs(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def mass(self, indices) -> float:
        return float(self.probs()[np.asarray(indices, dtype=int)].sum())


@dataclass(frozen=True, eq=False)
class Operator:
    """Real symmetric operator on a basis, stored sparse.

    ``diagonal`` marks cost-type operators, whose exponentials are applied
    elementwise.  Spectra are computed lazily and cached on the instance.
    """

    basis: Basis
    matrix: sp.csr_matrix
    diagonal: bool = False

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=float)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(f"operator shape {m.shape} does not match basis dimension {self.basis.dim}")
        asym = abs(m - m.T)
        if asym.nnz and asym.max() > HERMITIAN_TOL:
            raise ValueError("operator is not symmetric")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def diag(self) -> np.ndarray:
        return self.matrix.diagonal()

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """(eigenvalues ascending, orthonormal eigenvectors as columns)."""
        if self.diagonal:
            d = self.diag()
            order = np.argsort(d, kind="stable")
            return d[order], np.eye(self.dim)[:, order]
        if isinstance(self.basis, Hamming):
            return eigh_tridiagonal(self.diag(), self.matrix.diagonal(1))
        return eigh(self.dense())

    def expm_apply(self, t: float, vec: np.ndarray) -> np.ndarray:
        """exp(-i t A) vec."""
        vec = np.asarray(vec, dtype=complex)
        if t == 0:
            return vec.copy()
        if self.diagonal:
            return np.exp(-1j * t * self.diag()) * vec
        if isinstance(self.basis, Full):
            return expm_multiply(-1j * t * self.matrix, vec)
        w, v = self.spectrum
        return v @ (np.exp(-1j * t * w) * (v.T @ vec))

    def combine(self, other: "Operator", u: float) -> "Operator":
        """u * self + (1 - u) * other."""
        if other.basis != self.basis:
            raise ValueError("operators live on different bases")
        return Operator(self.basis, u * self.matrix + (1.0 - u) * other.matrix)


def cost_operator(cost: Cost, basis: Basis | None = None) -> Operator:
    basis = basis or cost.natural_basis()
    return Operator(basis, sp.diags(cost.on(basis)).tocsr(), diagonal=True)


def hamming_offdiag(n: int) -> np.ndarray:
    w = np.arange(n)
    return -np.sqrt((w + 1.0) * (n - w))


@lru_cache(maxsize=64)
def mixer_hamming(n: int) -> Operator:
    """B = -sum X_i on the symmetric subspace."""
    if n < 1:
        raise ValueError("n must be >= 1")
    off = hamming_offdiag(n)
    return Operator(Hamming(n), sp.diags([off, off], [-1, 1]).tocsr())


@lru_cache(maxsize=64)
def mixer_lambda(n: int, lam: float) -> Operator:
    """Bush mixer with central-flip coupling -lam (n+1) between (0, w) and (1, w)."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    basis = ConditionalHamming(n)
    m = n + 1
    off = np.zeros(2 * m - 1)
    off[: m - 1] = hamming_offdiag(n)
    off[m : 2 * m - 1] = hamming_offdiag(n)
    central = np.full(m, -lam * (n + 1))
    mat = sp.diags([off, off, central, central], [-1, 1, -m, m]).tocsr()
    return Operator(basis, mat)


def mixer_full(nbits: int, central_weight: float = 1.0) -> Operator:
    """-sum X_i on all strings; bit 0 weighted by ``central_weight``."""
    basis = Full(nbits)
    e = edge_classes(basis, central_bit=True)
    vals = np.where(e.central, -central_weight, -1.0)
    return Operator(basis, sp.coo_matrix((vals, (e.dst, e.src)), shape=(basis.dim,) * 2).tocsr())


def canonical_mixer(cost: Cost, basis: Basis | None = None) -> Operator:
    basis = basis or cost.natural_basis()
    if isinstance(basis, Hamming):
        return mixer_hamming(basis.n)
    if isinstance(basis, ConditionalHamming):
        return mixer_lambda(basis.n, 1.0 / (basis.n + 1))
    return mixer_full(basis.nbits)


def plus_state(basis: Basis) -> ReducedState:
    """|+>^(all bits) expressed in ``basis``."""
    return ReducedState(basis, np.sqrt(uniform_weights(basis)).astype(complex))


def mixer_ground_state(mixer: Operator) -> ReducedState:
    """Numerical ground state with its largest-magnitude amplitude made positive real."""
    if isinstance(mixer.basis, Full):
        _, v = eigh(mixer.dense(), subset_by_index=(0, 0))
    else:
        _, v = mixer.spectrum
    g = v[:, 0].astype(complex)
    k = int(np.argmax(np.abs(g)))
    g *= abs(g[k]) / g[k]
    return ReducedState(mixer.basis, g / np.linalg.norm(g))


def _check_basis(state: ReducedState, basis: Basis) -> None:
    if state.basis != basis:
        raise ValueError(f"basis mismatch: state on {state.basis}, operator on {basis}")


def phase_rotation(state: ReducedState, cost, gamma: float) -> ReducedState:
    """exp(-i gamma C) applied to ``state``; ``cost`` is a Cost or a diagonal Operator."""
    op = cost if isinstance(cost, Operator) else cost_operator(cost, state.basis)
    _check_basis(state, op.basis)
    return ReducedState(state.basis, np.exp(-1j * gamma * op.diag()) * state.amps)


def mixer_rotation(state: ReducedState, mixer: Operator, beta: float) -> ReducedState:
    _check_basis(state, mixer.basis)
    return ReducedState(state.basis, mixer.expm_apply(beta, state.amps))


@dataclass(frozen=True, eq=False)
class QaoaResult:
    state: ReducedState
    success: float
    energy: float


def success_probability(state: ReducedState, cost: Cost) -> float:
    return state.mass(minima_indices(cost, state.basis))


def energy(state: ReducedState, cost: Cost) -> float:
    return float(np.dot(state.probs(), cost.on(state.basis)))


def qaoa_run(
    cost: Cost,
    angles: QaoaAngles,
    mixer: Operator | None = None,
    basis: Basis | None = None,
    initial: ReducedState | None = None,
) -> QaoaResult:
    """Apply exp(-i beta_k B) exp(-i gamma_k C) for k = 1..p to |+>^(all bits)."""
    basis = basis or (mixer.basis if mixer is not None else cost.natural_basis())
    mixer = mixer or canonical_mixer(cost, basis)
    c_op = cost_operator(cost, basis)
    state = initial or plus_state(basis)
    for beta, gamma in zip(angles.betas, angles.gammas):
        state = mixer_rotation(phase_rotation(state, c_op, gamma), mixer, beta)
    return QaoaResult(state, success_probability(state, cost), energy(state, cost))


# ---------------------------------------------------------------------------
# Single-round protocols and bounds
# ---------------------------------------------------------------------------


def gamma_star(w_star: int, n: int) -> float:
    """arccos sqrt(w*/n): the Bloch angle whose per-qubit weight is w*/n."""
    if not 0 <= w_star <= n or n < 1:
        raise ValueError(f"need 0 <= w* <= n, got w*={w_star}, n={n}")
    return math.acos(math.sqrt(w_star / n))


def ramp_slope(cost: SymmetricCost) -> float:
    """Slope c1 of an affine ramp part r(w) = c0 + c1 w."""
    d = np.diff(cost.ramp_part)
    if d.size == 0 or not np.allclose(d, d[0], rtol=0, atol=1e-12 * max(1.0, abs(d[0]))):
        raise ValueError("ramp part is not affine in w")
    if d[0] == 0:
        raise ValueError("ramp part has zero slope")
    return float(d[0])


def binomial_peak(n: int, w_star: int) -> float:
    """C(n, w*) (w*/n)^w* (1 - w*/n)^(n - w*), with 0^0 = 1."""
    x = w_star / n
    return float(np.exp(log_binom(n, w_star) + xlogy(w_star, x) + xlogy(n - w_star, 1 - x)))


@dataclass(frozen=True)
class Theorem1Result:
    w_star: int
    beta: float
    gamma: float
    success: float
    closed_form: float


def theorem1_angles(cost: SymmetricCost, w_star: int) -> QaoaAngles:
    """beta = pi/4; gamma maps the ramp rotation onto per-qubit weight w*/n.

    A phase gamma c1 per set bit followed by the pi/4 mixer leaves each
    qubit in |1> with probability (1 - sin(gamma c1)) / 2; choosing
    gamma c1 = 2 gamma* - pi/2 makes that w*/n.
    """
    c1 = ramp_slope(cost)
    return QaoaAngles((math.pi / 4,), ((2 * gamma_star(w_star, cost.n) - math.pi / 2) / c1,))


def theorem1_protocol(cost: SymmetricCost, w_star: int) -> Theorem1Result:
    """Run the tuned QAOA1 and report the probability of measuring weight w*."""
    angles = theorem1_angles(cost, w_star)
    res = qaoa_run(cost, angles)
    return Theorem1Result(
        w_star=w_star,
        beta=angles.betas[0],
        gamma=angles.gammas[0],
        success=res.state.mass([w_star]),
        closed_form=binomial_peak(cost.n, w_star),
    )


def theorem1_search(cost: SymmetricCost) -> tuple[int, np.ndarray]:
    """Unknown-w* mode: try every candidate and keep the best.

    Returns (best candidate, probability of hitting a global minimum for
    each candidate).  Costs n+1 single-round runs.
    """
    minima = minima_indices(cost)
    hits = np.array([
        qaoa_run(cost, theorem1_angles(cost, w)).state.mass(minima) for w in range(cost.n + 1)
    ])
    return int(np.argmax(hits)), hits


def weak_overlap_q(psi0: ReducedState, pert: Sequence[float], gamma: float) -> float:
    """sum_w 4 |A_w|^2 sin^2(gamma s(w) / 2)."""
    s = np.asarray(pert, dtype=float)
    if s.shape != psi0.amps.shape:
        raise ValueError("perturbation length does not match the state")
    return float(np.sum(4 * psi0.probs() * np.sin(gamma * s / 2) ** 2))


def lemma1_floor(p: float, q: float) -> float:
    """p (1 - sqrt(q/p))^2, or 0 once q exceeds p."""
    if not p > 0:
        raise ValueError("p must be positive")
    if q < 0:
        raise ValueError("q must be non-negative")
    if q > p:
        return 0.0
    return p * (1 - math.sqrt(q / p)) ** 2


# ---------------------------------------------------------------------------
# QAO and spectral gaps
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QaoResult:
    state: ReducedState
    success: float


def qao_evolve(
    cost: Cost,
    path: ControlPath,
    mixer: Operator | None = None,
    dt: float | None = None,
    basis: Basis | None = None,
) -> QaoResult:
    """Schrodinger evolution under u B + (1 - u) C along a piecewise-constant path.

    Each piece is applied as exact exponentials; with ``dt`` set the piece
    is split into ``ceil(duration / dt)`` equal sub-steps.
    """
    basis = basis or (mixer.basis if mixer is not None else cost.natural_basis())
    mixer = mixer or canonical_mixer(cost, basis)
    c_op = cost_operator(cost, basis)
    state = mixer_ground_state(mixer).amps
    ops: dict[float, Operator] = {}
    for u, dur in path.pieces:
        if u not in ops:
            ops[u] = mixer.combine(c_op, u)
        op = ops[u]
        k = max(1, math.ceil(dur / dt - 1e-9)) if dt else 1
        for _ in range(k):
            state = op.expm_apply(dur / k, state)
    final = ReducedState(basis, state)
    return QaoResult(final, success_probability(final, cost))


def qao_converged(
    cost: Cost, T: float, mixer: Operator | None = None, steps: int = 16,
    tol: float = 1e-6, max_steps: int = 1 << 14,
) -> tuple[QaoResult, int]:
    """Linear anneal of duration T, doubling the path resolution until the
    success probability moves by less than ``tol``."""
    prev = qao_evolve(cost, linear_anneal_path(T, steps), mixer)
    while steps < max_steps:
        steps *= 2
        cur = qao_evolve(cost, linear_anneal_path(T, steps), mixer)
        if abs(cur.success - prev.success) < tol:
            return cur, steps
        prev = cur
    return prev, steps


def default_gap_grid() -> np.ndarray:
    """Uniform grid plus a geometric cluster near u = 0 where crossings of
    strongly boosted costs sit."""
    return np.unique(np.concatenate([np.linspace(0, 1, 201), np.geomspace(1e-4, 0.05, 60)]))


@dataclass(frozen=True, eq=False)
class GapScan:
    grid: np.ndarray
    gaps: np.ndarray
    min_gap: float
    u_star: float
    degenerate: bool
    refined: bool


class _GapPencil:
    """Two lowest eigenvalues of u B + (1 - u) C via banded solvers."""

    def __init__(self, mixer: Operator, c_op: Operator):
        self.b, self.c = mixer.matrix, c_op.matrix
        pattern = sp.csr_matrix(abs(self.b) + abs(self.c))
        self.perm = reverse_cuthill_mckee(pattern, symmetric_mode=True)
        p = pattern[self.perm][:, self.perm].tocoo()
        self.kb = max(1, int(np.max(np.abs(p.row - p.col))))
        self.bp = sp.csr_matrix(self.b)[self.perm][:, self.perm].toarray()
        self.cp = sp.csr_matrix(self.c)[self.perm][:, self.perm].toarray()

    def lowest(self, u: float) -> np.ndarray:
        h = u * self.bp + (1 - u) * self.cp
        d = h.shape[0]
        band = np.zeros((self.kb + 1, d))
        for k in range(self.kb + 1):
            band[k, : d - k] = np.diagonal(h, -k)
        return eig_banded(band, lower=True, eigvals_only=True, select="i", select_range=(0, 1))

    def gap(self, u: float) -> float:
        e = self.lowest(u)
        return float(e[1] - e[0])


def spectral_gap_scan(
    cost: Cost,
    mixer: Operator | None = None,
    grid=None,
    precise: bool | None = None,
) -> GapScan:
    """Gap E1 - E0 of u B + (1 - u) C over ``grid`` with one local refinement.

    The grid minimum is polished by bounded Brent minimization inside its
    neighbouring grid cell.  Gaps too small for double precision
    (``precise=None`` decides automatically) are re-minimized in extended
    precision.  A ground-state degeneracy is flagged, not raised.
    """
    basis = mixer.basis if mixer is not None else cost.natural_basis()
    mixer = mixer or canonical_mixer(cost, basis)
    grid = default_gap_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0 or grid.min() < 0 or grid.max() > 1:
        raise ValueError("gap grid must be a non-empty subset of [0, 1]")
    pencil = _GapPencil(mixer, cost_operator(cost, basis))
    gaps = np.array([pencil.gap(u) for u in grid])
    i = int(np.argmin(gaps))
    g_min, u_min = float(gaps[i]), float(grid[i])
    if grid.size > 1:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        r = minimize_scalar(pencil.gap, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
        if r.fun < g_min:
            g_min, u_min = float(r.fun), float(r.x)
        # bounded Brent stops at a relative tolerance ~1e-8 |u|; polish in a
        # shifted coordinate so narrow avoided crossings are resolved too
        w = 1e-6 * max(abs(u_min), 1e-3)
        r = minimize_scalar(lambda t: pencil.gap(u_min + t), bounds=(max(-w, lo - u_min), min(w, hi - u_min)),
                            method="bounded", options={"xatol": 1e-18})
        if r.fun < g_min:
            g_min, u_min = float(r.fun), float(u_min + r.x)
    refined = False
    if precise or (precise is None and g_min < PRECISE_GAP):
        g_min, u_min = _precise.refine_min_gap(mixer.matrix, pencil.c, u_min)
        refined = True
    return GapScan(grid, gaps, g_min, u_min, g_min <= DEGENERATE_GAP, refined)

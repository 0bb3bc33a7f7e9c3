"""Cost landscapes on bit strings and the reduced bases they live on.

Two families are supported:

* ``SymmetricCost`` -- a function of the Hamming weight only, stored as the
  table ``values[w]`` together with a ramp/perturbation split
  ``values = ramp_part + pert_part``.
* ``BushCost`` -- one central bit ``z0`` plus ``n`` peripheral bits with
  cost ``z0 + w * (1 - z0)``.

Bases are small value objects.  Every cost can be evaluated on any basis
it is compatible with, and every basis knows its edge classes (the lumped
hypercube neighbourhoods) so the classical and quantum modules never
enumerate bit strings unless they are explicitly asked to (``Full``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaln

FULL_MAX_BITS = 12


# ---------------------------------------------------------------------------
# Bases
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Hamming:
    """n+1 states |w>, w = 0..n."""

    n: int

    @property
    def dim(self) -> int:
        return self.n + 1

    def label(self, index: int) -> int:
        return int(index)

    def index(self, w: int) -> int:
        if not 0 <= w <= self.n:
            raise ValueError(f"weight {w} outside 0..{self.n}")
        return int(w)


@dataclass(frozen=True)
class ConditionalHamming:
    """2(n+1) states |z0, w>; index = z0 * (n + 1) + w."""

    n: int

    @property
    def dim(self) -> int:
        return 2 * (self.n + 1)

    def label(self, index: int) -> tuple[int, int]:
        z0, w = divmod(int(index), self.n + 1)
        return z0, w

    def index(self, label: tuple[int, int]) -> int:
        z0, w = label
        if z0 not in (0, 1) or not 0 <= w <= self.n:
            raise ValueError(f"label {label} outside the conditional Hamming basis")
        return z0 * (self.n + 1) + w


@dataclass(frozen=True)
class Full:
    """All 2**nbits strings; bit i of the integer label is z_i.

    Only meant for brute-force cross-checks, hence the size cap.
    """

    nbits: int

    def __post_init__(self):
        if not 1 <= self.nbits <= FULL_MAX_BITS:
            raise ValueError(f"Full basis limited to 1..{FULL_MAX_BITS} bits, got {self.nbits}")

    @property
    def dim(self) -> int:
        return 1 << self.nbits

    def label(self, index: int) -> int:
        return int(index)

    def index(self, label: int) -> int:
        return int(label)

    def bits(self) -> np.ndarray:
        """(dim, nbits) array of 0/1 entries."""
        z = np.arange(self.dim)
        return ((z[:, None] >> np.arange(self.nbits)) & 1).astype(np.int64)


Basis = Union[Hamming, ConditionalHamming, Full]


def log_binom(n: int, k) -> np.ndarray:
    k = np.asarray(k)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def class_sizes(basis: Basis) -> np.ndarray:
    """Number of bit strings represented by each basis state (as float)."""
    if isinstance(basis, Hamming):
        return np.exp(log_binom(basis.n, np.arange(basis.n + 1)))
    if isinstance(basis, ConditionalHamming):
        s = np.exp(log_binom(basis.n, np.arange(basis.n + 1)))
        return np.concatenate([s, s])
    return np.ones(basis.dim)


def uniform_weights(basis: Basis) -> np.ndarray:
    """Probability of each basis state under the uniform distribution on strings."""
    if isinstance(basis, Hamming):
        w = np.arange(basis.n + 1)
        return np.exp(log_binom(basis.n, w) - basis.n * np.log(2.0))
    if isinstance(basis, ConditionalHamming):
        w = np.arange(basis.n + 1)
        half = np.exp(log_binom(basis.n, w) - (basis.n + 1) * np.log(2.0))
        return np.concatenate([half, half])
    return np.full(basis.dim, 1.0 / basis.dim)


@dataclass(frozen=True)
class EdgeClasses:
    """Directed lumped hypercube edges: ``mult`` strings-neighbours from src to dst.

    ``central`` marks edges that flip the central bit (Bush bases only).
    """

    src: np.ndarray
    dst: np.ndarray
    mult: np.ndarray
    central: np.ndarray


def _hamming_edges(n: int, offset: int = 0):
    w = np.arange(n + 1)
    src = np.concatenate([w[:-1], w[1:]]) + offset
    dst = np.concatenate([w[:-1] + 1, w[1:] - 1]) + offset
    mult = np.concatenate([n - w[:-1], w[1:]]).astype(float)
    return src, dst, mult


def edge_classes(basis: Basis, central_bit: bool = False) -> EdgeClasses:
    """Lumped neighbourhoods of ``basis``.

    For ``Full`` bases with ``central_bit=True`` bit 0 is flagged as the
    central bit so mixers can weight it separately.
    """
    if isinstance(basis, Hamming):
        src, dst, mult = _hamming_edges(basis.n)
        return EdgeClasses(src, dst, mult, np.zeros(src.size, bool))
    if isinstance(basis, ConditionalHamming):
        m = basis.n + 1
        s0, d0, m0 = _hamming_edges(basis.n)
        s1, d1, m1 = _hamming_edges(basis.n, offset=m)
        w = np.arange(m)
        src = np.concatenate([s0, s1, w, w + m])
        dst = np.concatenate([d0, d1, w + m, w])
        mult = np.concatenate([m0, m1, np.ones(2 * m)])
        central = np.concatenate([np.zeros(s0.size + s1.size, bool), np.ones(2 * m, bool)])
        return EdgeClasses(src, dst, mult, central)
    z = np.arange(basis.dim)
    bit = np.arange(basis.nbits)
    src = np.repeat(z, basis.nbits)
    dst = (z[:, None] ^ (1 << bit)).ravel()
    central = np.tile(bit == 0, basis.dim) if central_bit else np.zeros(src.size, bool)
    return EdgeClasses(src, dst, np.ones(src.size), central)


def hamming_weight(bits: Union[Sequence[int], str, int]) -> int:
    """Number of ones in a bit sequence, a '0101' string or a non-negative int."""
    if isinstance(bits, str):
        bad = set(bits) - {"0", "1"}
        if bad:
            raise ValueError(f"not a bit string: {bits!r}")
        return bits.count("1")
    if isinstance(bits, (int, np.integer)):
        if bits < 0:
            raise ValueError("negative integers have no finite bit string")
        return bin(int(bits)).count("1")
    return int(sum(int(b) for b in bits))


# ---------------------------------------------------------------------------
# Costs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SymmetricCost:
    """Hamming-symmetric cost c(w) = r(w) + s(w).

    ``kind`` is ``"ramp"``, ``"spike"`` or ``"custom"``; ``params`` holds
    the spike exponents for ``"spike"``.
    """

    n: int
    values: np.ndarray
    ramp_part: np.ndarray
    pert_part: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("values", "ramp_part", "pert_part"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.values.shape != (self.n + 1,):
            raise ValueError(f"values must have length n+1 = {self.n + 1}")
        if self.ramp_part.shape != self.values.shape or self.pert_part.shape != self.values.shape:
            raise ValueError("ramp_part and pert_part must match values in length")
        if not np.array_equal(self.ramp_part + self.pert_part, self.values):
            raise ValueError("values must equal ramp_part + pert_part exactly")

    def natural_basis(self) -> Hamming:
        return Hamming(self.n)

    def on(self, basis: Basis) -> np.ndarray:
        """Cost of every state of ``basis``."""
        if isinstance(basis, Hamming):
            _check_n(basis.n, self.n)
            return self.values
        if isinstance(basis, Full):
            _check_n(basis.nbits, self.n)
            return self.values[basis.bits().sum(axis=1)]
        raise ValueError("symmetric costs live on Hamming or Full bases")

    def describe(self) -> str:
        if self.kind == "spike":
            return f"spike(n={self.n}, a={self.params['a']}, b={self.params['b']})"
        return f"{self.kind}(n={self.n})"


@dataclass(frozen=True)
class BushCost:
    """Central bit z0 plus n peripheral bits: cost z0 + w (1 - z0)."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("BushCost needs at least one peripheral bit")

    def natural_basis(self) -> ConditionalHamming:
        return ConditionalHamming(self.n)

    def on(self, basis: Basis) -> np.ndarray:
        if isinstance(basis, ConditionalHamming):
            _check_n(basis.n, self.n)
            w = np.arange(self.n + 1, dtype=float)
            return np.concatenate([w, np.ones(self.n + 1)])
        if isinstance(basis, Full):
            _check_n(basis.nbits, self.n + 1)
            bits = basis.bits()
            z0 = bits[:, 0]
            w = bits[:, 1:].sum(axis=1)
            return (z0 + w * (1 - z0)).astype(float)
        raise ValueError("BushCost lives on ConditionalHamming or Full bases")

    def describe(self) -> str:
        return f"bush(n={self.n})"


Cost = Union[SymmetricCost, BushCost]


def _check_n(got: int, want: int) -> None:
    if got != want:
        raise ValueError(f"basis size {got} does not match cost size {want}")


def make_ramp(n: int) -> SymmetricCost:
    if n < 1:
        raise ValueError("n must be >= 1")
    w = np.arange(n + 1, dtype=float)
    return SymmetricCost(n, w, w, np.zeros(n + 1), kind="ramp")


def spike_window(n: int, a: float) -> np.ndarray:
    """Boolean mask of weights with |w - n/4| <= n**a / 2 (closed interval)."""
    w = np.arange(n + 1)
    return np.abs(w - n / 4) <= n**a / 2


def make_spike(n: int, a: float, b: float) -> SymmetricCost:
    """Hamming ramp plus a rectangular spike of height n**b centred at n/4."""
    if n < 4:
        raise ValueError("spike instances need n >= 4")
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise ValueError(f"spike exponents must lie in [0, 1], got a={a}, b={b}")
    w = np.arange(n + 1, dtype=float)
    s = np.where(spike_window(n, a), float(n) ** b, 0.0)
    return SymmetricCost(n, w + s, w, s, kind="spike", params={"a": a, "b": b})


def make_custom(values, ramp_part=None, pert_part=None) -> SymmetricCost:
    values = np.asarray(values, dtype=float)
    n = values.size - 1
    if ramp_part is None and pert_part is None:
        ramp_part, pert_part = values, np.zeros_like(values)
    elif ramp_part is None:
        ramp_part = values - np.asarray(pert_part, dtype=float)
    elif pert_part is None:
        pert_part = values - np.asarray(ramp_part, dtype=float)
    return SymmetricCost(n, values, ramp_part, pert_part, kind="custom")


def load_cost_table(path: Union[str, Path]) -> SymmetricCost:
    """Read a whitespace table with lines ``w c(w) [r(w) s(w)]``.

    Blank lines and ``#`` comments are ignored.  Every weight 0..n must
    appear exactly once.
    """
    rows: dict[int, tuple[float, float, float]] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 4):
            raise ValueError(f"{path}:{lineno}: expected 'w c' or 'w c r s', got {raw!r}")
        w = int(parts[0])
        c = float(parts[1])
        r, s = (float(parts[2]), float(parts[3])) if len(parts) == 4 else (c, 0.0)
        if w in rows:
            raise ValueError(f"{path}:{lineno}: weight {w} listed twice")
        if r + s != c:
            raise ValueError(f"{path}:{lineno}: r + s != c for weight {w}")
        rows[w] = (c, r, s)
    if not rows:
        raise ValueError(f"{path}: empty cost table")
    n = max(rows)
    missing = sorted(set(range(n + 1)) - set(rows))
    if missing or min(rows) < 0:
        raise ValueError(f"{path}: weights must cover 0..{n}; missing {missing}")
    table = np.array([rows[w] for w in range(n + 1)])
    return SymmetricCost(n, table[:, 0], table[:, 1], table[:, 2], kind="custom")


def bush_cost(bc: BushCost, z0: int, w: int) -> float:
    if z0 not in (0, 1):
        raise ValueError("z0 must be 0 or 1")
    if not 0 <= w <= bc.n:
        raise ValueError(f"peripheral weight {w} outside 0..{bc.n}")
    return float(z0 + w * (1 - z0))


def minima_indices(cost: Cost, basis: Basis | None = None) -> np.ndarray:
    basis = basis or cost.natural_basis()
    v = cost.on(basis)
    return np.flatnonzero(v == v.min())


def global_minima(cost: Cost, basis: Basis | None = None) -> frozenset:
    """All basis labels attaining the minimum cost."""
    basis = basis or cost.natural_basis()
    return frozenset(basis.label(i) for i in minima_indices(cost, basis))


def aggregate(full_vec: np.ndarray, full: Full, reduced: Basis) -> np.ndarray:
    """Sum a Full-basis vector into the classes of ``reduced``."""
    bits = full.bits()
    if isinstance(reduced, Hamming):
        idx = bits.sum(axis=1)
    elif isinstance(reduced, ConditionalHamming):
        idx = bits[:, 0] * (reduced.n + 1) + bits[:, 1:].sum(axis=1)
    else:
        raise ValueError("can only aggregate into Hamming or ConditionalHamming")
    out = np.zeros(reduced.dim, dtype=np.result_type(full_vec, float))
    np.add.at(out, idx, full_vec)
    return out


def full_basis_for(cost: Cost) -> Full:
    return Full(cost.n + 1) if isinstance(cost, BushCost) else Full(cost.n)

"""Schedules that drive the dynamics.

* ``TemperatureSchedule`` -- Metropolis rounds ``(tau_i, t_i)``; ``tau`` may be
  ``math.inf`` (accept every move).
* ``ControlPath`` -- piecewise-constant control ``u(t)`` in [0, 1] as
  ``(u, duration)`` pieces.  The same object drives linear-update SA
  (``u D + (1-u) G``) and QAO (``u B + (1-u) C``).
* ``QaoaAngles`` -- the (beta, gamma) lists of a depth-p QAOA circuit.

All three round-trip through plain dicts/lists for config files.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Iterable


def _parse_tau(value) -> float:
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        value = float(value)
    tau = float(value)
    if math.isnan(tau) or tau < 0:
        raise ValueError(f"temperature must be >= 0 or inf, got {value!r}")
    return tau


@dataclass(frozen=True)
class TemperatureSchedule:
    rounds: tuple[tuple[float, int], ...]

    def __post_init__(self):
        clean = []
        for tau, steps in self.rounds:
            tau = _parse_tau(tau)
            if int(steps) != steps or steps < 0:
                raise ValueError(f"round length must be a non-negative integer, got {steps!r}")
            clean.append((tau, int(steps)))
        object.__setattr__(self, "rounds", tuple(clean))

    @property
    def p(self) -> int:
        return len(self.rounds)

    @property
    def total_steps(self) -> int:
        return sum(t for _, t in self.rounds)

    def to_config(self) -> list:
        return [["inf" if math.isinf(tau) else tau, steps] for tau, steps in self.rounds]

    @classmethod
    def from_config(cls, rows: Iterable) -> "TemperatureSchedule":
        return cls(tuple((_parse_tau(tau), steps) for tau, steps in rows))


@dataclass(frozen=True)
class ControlPath:
    pieces: tuple[tuple[float, float], ...]

    def __post_init__(self):
        clean = []
        for u, dur in self.pieces:
            u, dur = float(u), float(dur)
            if not 0.0 <= u <= 1.0:
                raise ValueError(f"control value {u} outside [0, 1]")
            if not dur > 0:
                raise ValueError(f"piece duration must be positive, got {dur}")
            clean.append((u, dur))
        if not clean:
            raise ValueError("a control path needs at least one piece")
        object.__setattr__(self, "pieces", tuple(clean))

    @property
    def total_time(self) -> float:
        return math.fsum(d for _, d in self.pieces)

    @property
    def bang_bang(self) -> bool:
        return all(u in (0.0, 1.0) for u, _ in self.pieces)

    def to_config(self) -> list:
        return [[u, d] for u, d in self.pieces]

    @classmethod
    def from_config(cls, rows: Iterable) -> "ControlPath":
        return cls(tuple((u, d) for u, d in rows))


@dataclass(frozen=True)
class QaoaAngles:
    betas: tuple[float, ...]
    gammas: tuple[float, ...]

    def __post_init__(self):
        betas = tuple(float(b) for b in self.betas)
        gammas = tuple(float(g) for g in self.gammas)
        if len(betas) != len(gammas):
            raise ValueError("betas and gammas must have equal length")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "gammas", gammas)

    @property
    def p(self) -> int:
        return len(self.betas)

    def to_config(self) -> dict:
        return {"betas": list(self.betas), "gammas": list(self.gammas)}

    @classmethod
    def from_config(cls, data) -> "QaoaAngles":
        """Accept ``{"betas": [...], "gammas": [...]}`` or a flat interleaved
        list ``[beta_1, gamma_1, beta_2, gamma_2, ...]``."""
        if isinstance(data, dict):
            return cls(tuple(data["betas"]), tuple(data["gammas"]))
        flat = [float(x) for x in data]
        if len(flat) % 2:
            raise ValueError("flat angle list must alternate beta, gamma")
        return cls(tuple(flat[0::2]), tuple(flat[1::2]))


def linear_anneal_path(T: float, steps: int) -> ControlPath:
    """Midpoint discretisation of u(s) = 1 - s over total time T."""
    if not T > 0 or steps < 1:
        raise ValueError("need T > 0 and steps >= 1")
    dur = T / steps
    return ControlPath(tuple((1.0 - (k + 0.5) / steps, dur) for k in range(steps)))


def geometric_cooling(tau0: float, ratio: float, p: int, steps_per: int) -> TemperatureSchedule:
    if not tau0 > 0:
        raise ValueError("initial temperature must be positive")
    if not 0 < ratio <= 1:
        raise ValueError("cooling ratio must lie in (0, 1]")
    return TemperatureSchedule(tuple((tau0 * ratio**i, steps_per) for i in range(p)))


def bbsa_two_phase(t_descent1: float, t_diffuse: float, t_descent2: float) -> ControlPath:
    """Descent, a burst of diffusion, descent again; empty phases are dropped."""
    durations = (t_descent1, t_diffuse, t_descent2)
    if any(d < 0 for d in durations):
        raise ValueError("phase durations must be non-negative")
    pieces = tuple((u, d) for u, d in zip((0.0, 1.0, 0.0), durations) if d > 0)
    if not pieces:
        raise ValueError("at least one phase must have positive duration")
    return ControlPath(pieces)


def schedule_from_config(data) -> TemperatureSchedule | ControlPath | QaoaAngles:
    """Build a schedule from its config block.

    ``{"temperatures": [[tau, steps], ...]}``, ``{"path": [[u, dur], ...]}``
    or ``{"angles": ...}``.
    """
    if "temperatures" in data:
        return TemperatureSchedule.from_config(data["temperatures"])
    if "path" in data:
        return ControlPath.from_config(data["path"])
    if "angles" in data:
        return QaoaAngles.from_config(data["angles"])
    raise ValueError("schedule block needs one of 'temperatures', 'path', 'angles'")


def schedule_to_config(schedule) -> dict:
    if isinstance(schedule, TemperatureSchedule):
        return {"temperatures": schedule.to_config()}
    if isinstance(schedule, ControlPath):
        return {"path": schedule.to_config()}
    if isinstance(schedule, QaoaAngles):
        return {"angles": schedule.to_config()}
    raise TypeError(f"not a schedule: {schedule!r}")


def digest(obj) -> str:
    """Short stable hash of a schedule (or any JSON-able config block)."""
    if isinstance(obj, (TemperatureSchedule, ControlPath, QaoaAngles)):
        obj = schedule_to_config(obj)
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]

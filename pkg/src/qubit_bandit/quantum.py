"""Two-branch quantum states and their seeded measurement.

Every state here is fully described by one branch probability: a lone qubit
by the chance of reading 0, an entangled pair or GHZ register by the weight
of its first branch. Amplitudes are real and non-negative, so storing the
probability directly keeps normalization exact by construction. Measurement
never mutates a state; callers re-prepare (or reuse) states explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Correlation",
    "Direction",
    "Qubit",
    "EntangledPair",
    "GhzState",
    "RandomStream",
    "measure_qubit",
    "measure_pair",
    "measure_ghz",
    "sample_bit",
    "sample_bits",
    "shift_probability",
    "angle_to_p0",
    "p0_to_angle",
]

_SEED_LIMIT = 2**64


def _check_probability(name: str, value: float) -> None:
    # also rejects NaN, since both comparisons come back False
    if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
        raise ValueError(f"{name} must be in [0, 1], got {value!r}")


class Correlation(Enum):
    """Branch structure of a two-qubit state: equal bits or opposite bits."""

    CORRELATED = "correlated"  # sqrt(p)|00> + sqrt(1-p)|11>
    ANTICORRELATED = "anticorrelated"  # sqrt(p)|01> + sqrt(1-p)|10>


class Direction(Enum):
    """Which basis outcome a probability shift favors."""

    TOWARD_ZERO = "toward0"
    TOWARD_ONE = "toward1"


@dataclass(frozen=True)
class Qubit:
    """Single two-level state sqrt(p0)|0> + sqrt(1-p0)|1>, stored as p0."""

    p0: float

    def __post_init__(self) -> None:
        _check_probability("p0", self.p0)

    @property
    def p1(self) -> float:
        return 1.0 - self.p0


@dataclass(frozen=True)
class EntangledPair:
    """Two qubits restricted to two branches.

    Correlated pairs read (0, 0) with probability p_first and (1, 1)
    otherwise; anticorrelated pairs read (0, 1) and (1, 0).
    """

    correlation: Correlation
    p_first: float

    def __post_init__(self) -> None:
        if not isinstance(self.correlation, Correlation):
            raise ValueError(f"correlation must be a Correlation, got {self.correlation!r}")
        _check_probability("p_first", self.p_first)


@dataclass(frozen=True)
class GhzState:
    """n qubits sharing two branches: all read 0 (probability p0) or all read 1."""

    n: int
    p0: float

    def __post_init__(self) -> None:
        if not (isinstance(self.n, int) and self.n >= 2):
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        _check_probability("p0", self.p0)


class RandomStream:
    """Deterministic uniform source with derivable substreams.

    The same (seed, stream) pair always yields the same draw sequence, on any
    platform. Distinct stream indices under one root seed give statistically
    independent sequences, which is what lets trials run in any order (or
    concurrently) without changing results.
    """

    def __init__(self, seed: int, stream: int = 0) -> None:
        if not (isinstance(seed, int) and 0 <= seed < _SEED_LIMIT):
            raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
        if not (isinstance(stream, int) and stream >= 0):
            raise ValueError(f"stream must be a non-negative integer, got {stream!r}")
        self.seed = seed
        self.stream = stream
        generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))
        self._random = generator.random

    def uniform(self) -> float:
        """One draw in [0, 1)."""
        return self._random()

    def uniforms(self, count: int) -> np.ndarray:
        """count draws in [0, 1), identical to count successive uniform() calls."""
        if not (isinstance(count, int) and count >= 0):
            raise ValueError(f"count must be a non-negative integer, got {count!r}")
        return self._random(count)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, stream={self.stream})"


def sample_bit(p_zero: float, rng: RandomStream) -> int:
    """Draw one bit that reads 0 with probability p_zero. Consumes one draw."""
    return 0 if rng.uniform() < p_zero else 1


def sample_bits(p_zero: float, count: int, rng: RandomStream) -> np.ndarray:
    """Vectorized sample_bit: count bits from one source, one draw each."""
    _check_probability("p_zero", p_zero)
    return (rng.uniforms(count) >= p_zero).astype(np.uint8)


def measure_qubit(state: Qubit, rng: RandomStream) -> int:
    """Read a qubit in the 0/1 basis. One draw; the state is not modified."""
    return sample_bit(state.p0, rng)


def measure_pair(state: EntangledPair, rng: RandomStream) -> tuple[int, int]:
    """Read both halves of a pair jointly. One draw selects the branch."""
    first = rng.uniform() < state.p_first
    if state.correlation is Correlation.CORRELATED:
        return (0, 0) if first else (1, 1)
    return (0, 1) if first else (1, 0)


def measure_ghz(state: GhzState, rng: RandomStream) -> int:
    """Read a GHZ register: the common bit every party observes. One draw."""
    return sample_bit(state.p0, rng)


def shift_probability(p0: float, direction: Direction, c: float) -> float:
    """Move p0 by c toward the given outcome, clamped to [0, 1].

    This is the single update primitive every decision policy uses; c must
    be strictly positive.
    """
    if not c > 0.0:
        raise ValueError(f"shift constant must be > 0, got {c!r}")
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"p0 must be in [0, 1], got {p0!r}")
    if direction is Direction.TOWARD_ZERO:
        return min(p0 + c, 1.0)
    if direction is Direction.TOWARD_ONE:
        return max(p0 - c, 0.0)
    raise ValueError(f"direction must be a Direction, got {direction!r}")


def angle_to_p0(theta_degrees: float) -> float:
    """Zero-outcome probability of a linear polarization theta degrees from horizontal.

    Horizontal (0 degrees) always reads 0; vertical (90 degrees) always reads 1;
    45 degrees is the balanced source.
    """
    if not (isinstance(theta_degrees, (int, float)) and 0.0 <= theta_degrees <= 90.0):
        raise ValueError(f"theta_degrees must be in [0, 90], got {theta_degrees!r}")
    return math.cos(math.radians(theta_degrees)) ** 2


def p0_to_angle(p0: float) -> float:
    """Inverse of angle_to_p0: the polarizer angle, in degrees, producing p0."""
    _check_probability("p0", p0)
    return math.degrees(math.acos(math.sqrt(p0)))

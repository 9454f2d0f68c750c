"""Exact references the sampling paths are checked against.

Everything here is computed by enumeration rather than simulation: the
one-step outcome distribution of single-agent play, its expected state
change, the exact state distribution after T rounds (the clamped update
walks a finite lattice, so the chain is small enough to power up), and a
report that puts the long-run behavior next to the simple reward-share
ratio p1 / (p1 + p2) without asserting that they agree.

The enumerators deliberately re-derive the clamped update inline instead of
calling the policy code, so the two routes stay independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .policies import GhzConstants, majority_update_rule

__all__ = [
    "TransitionDistribution",
    "DriftCurve",
    "AsymptoticReport",
    "enumerate_single_step",
    "enumerate_coop_step",
    "enumerate_ghz_step",
    "expected_drift",
    "drift_curve",
    "evolve_distribution",
    "asymptotic_claim_report",
]

_PROB_SUM_TOL = 1e-12


def _check_probability(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
        raise ValueError(f"{name} must be in [0, 1], got {value!r}")


def _check_increment(c: float) -> None:
    if not (isinstance(c, (int, float)) and c > 0.0):
        raise ValueError(f"c must be > 0, got {c!r}")


@dataclass(frozen=True)
class TransitionDistribution:
    """A finite distribution over next-state values, sorted ascending."""

    outcomes: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "outcomes", tuple((float(s), float(p)) for s, p in self.outcomes))
        total = 0.0
        previous = None
        for state, prob in self.outcomes:
            if not 0.0 <= state <= 1.0:
                raise ValueError(f"state {state!r} outside [0, 1]")
            if prob < 0.0:
                raise ValueError(f"negative probability {prob!r} for state {state!r}")
            if previous is not None and state <= previous:
                raise ValueError("outcomes must be sorted by state with no duplicates")
            previous = state
            total += prob
        if abs(total - 1.0) > _PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, expected 1 within {_PROB_SUM_TOL}")

    def probabilities(self) -> dict[float, float]:
        return dict(self.outcomes)

    def support(self) -> tuple[float, ...]:
        return tuple(state for state, _ in self.outcomes)

    def mean(self) -> float:
        return float(sum(state * prob for state, prob in self.outcomes))


def _branches(p0: float, p1: float, p2: float) -> tuple[tuple[bool, float], ...]:
    """The four (machine, reward) outcomes of one single-agent round.

    Returned in a fixed canonical order as (shifts toward zero, probability):
    machine 0 rewarded, machine 0 unrewarded, machine 1 rewarded, machine 1
    unrewarded. Both the enumerator and the chain builder consume this, so
    their floating-point sums agree bit for bit.
    """
    return (
        (True, p0 * p1),
        (False, p0 * (1.0 - p1)),
        (False, (1.0 - p0) * p2),
        (True, (1.0 - p0) * (1.0 - p2)),
    )


def _merged(moves: list[tuple[float, float]]) -> TransitionDistribution:
    merged: dict[float, float] = {}
    for state, prob in moves:
        merged[state] = merged.get(state, 0.0) + prob
    outcomes = tuple(sorted((s, p) for s, p in merged.items() if p > 0.0))
    return TransitionDistribution(outcomes)


def enumerate_single_step(p0: float, p1: float, p2: float, c: float) -> TransitionDistribution:
    """Exact one-step outcome distribution of single-agent play.

    Enumerates the four (machine, reward) combinations, applies the clamped
    shift to each, and merges duplicates (clamping can collapse outcomes).
    """
    for name, value in (("p0", p0), ("p1", p1), ("p2", p2)):
        _check_probability(name, value)
    _check_increment(c)
    up = min(p0 + c, 1.0)
    down = max(p0 - c, 0.0)
    moves = [(up if toward_zero else down, prob) for toward_zero, prob in _branches(p0, p1, p2)]
    return _merged(moves)


def enumerate_coop_step(p0: float, p1: float, p2: float, c: float) -> TransitionDistribution:
    """Exact one-step outcome distribution of cooperative paired play.

    Conditioned on the measured branch, the two rewards are independent
    Bernoulli draws on the same machine; a split leaves the state in place.
    """
    for name, value in (("p0", p0), ("p1", p1), ("p2", p2)):
        _check_probability(name, value)
    _check_increment(c)
    up = min(p0 + c, 1.0)
    down = max(p0 - c, 0.0)
    moves: list[tuple[float, float]] = []
    for bit, branch_prob, q in ((0, p0, p1), (1, 1.0 - p0, p2)):
        toward_bit = up if bit == 0 else down
        away_from_bit = down if bit == 0 else up
        moves.append((toward_bit, branch_prob * q * q))
        moves.append((p0, branch_prob * 2.0 * q * (1.0 - q)))
        moves.append((away_from_bit, branch_prob * (1.0 - q) * (1.0 - q)))
    return _merged(moves)


def enumerate_ghz_step(
    p0: float, p1: float, p2: float, n: int, constants: GhzConstants
) -> TransitionDistribution:
    """Exact one-step outcome distribution of n-user majority play.

    Conditioned on the measured branch, the rewarded count is binomial; the
    majority rule maps each count to a graded shift, a tie to no move.
    """
    for name, value in (("p0", p0), ("p1", p1), ("p2", p2)):
        _check_probability(name, value)
    if not (isinstance(n, int) and n >= 2):
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    constants.validate_for(n)
    moves: list[tuple[float, float]] = []
    for bit, branch_prob, q in ((0, p0, p1), (1, 1.0 - p0, p2)):
        for rewarded in range(n + 1):
            prob = branch_prob * math.comb(n, rewarded) * q**rewarded * (1.0 - q) ** (n - rewarded)
            outcome = majority_update_rule(n, (1,) * rewarded + (0,) * (n - rewarded))
            if outcome is None:
                moves.append((p0, prob))
                continue
            index, majority_rewarded = outcome
            step = constants.constants[index - 1]
            toward_zero = (bit == 0) == majority_rewarded
            moves.append((min(p0 + step, 1.0) if toward_zero else max(p0 - step, 0.0), prob))
    return _merged(moves)


def expected_drift(p0: float, p1: float, p2: float, c: float) -> float:
    """Mean one-step change of the state under single-agent play, ignoring clamps.

    Closed form: c * (p0 * (2*p1 - 1) + (1 - p0) * (1 - 2*p2)). Positive drift
    pushes toward machine 0.
    """
    for name, value in (("p0", p0), ("p1", p1), ("p2", p2)):
        _check_probability(name, value)
    _check_increment(c)
    return c * (p0 * (2.0 * p1 - 1.0) + (1.0 - p0) * (1.0 - 2.0 * p2))


@dataclass(frozen=True)
class DriftCurve:
    """expected_drift sampled over a grid of start states, for plotting or fixed-point hunting."""

    c: float
    points: tuple[tuple[float, float], ...]  # (p0, expected change)


def drift_curve(p1: float, p2: float, c: float, points: int = 101) -> DriftCurve:
    if points < 2:
        raise ValueError(f"points must be >= 2, got {points!r}")
    grid = np.linspace(0.0, 1.0, points)
    return DriftCurve(c, tuple((float(g), expected_drift(float(g), p1, p2, c)) for g in grid))


def _lattice_chain(
    p0: float, p1: float, p2: float, c: float, max_states: int
) -> tuple[list[Fraction], int, np.ndarray]:
    """Reachable clamped lattice and its transition matrix.

    States are exact rationals (the binary floats p0 and c are taken at face
    value), so lattice points reached along different paths always merge.
    Returns (sorted states, index of the start state, row-stochastic matrix).
    """
    c_exact = Fraction(c)
    zero, one = Fraction(0), Fraction(1)
    start = Fraction(p0)

    def up(s: Fraction) -> Fraction:
        t = s + c_exact
        return one if t > one else t

    def down(s: Fraction) -> Fraction:
        t = s - c_exact
        return zero if t < zero else t

    states = {start}
    frontier = [start]
    while frontier:
        s = frontier.pop()
        for nxt in (up(s), down(s)):
            if nxt not in states:
                states.add(nxt)
                frontier.append(nxt)
        if len(states) > max_states:
            raise ValueError(
                f"reachable state lattice exceeds max_states={max_states}; "
                "raise the bound or use a larger c"
            )
    order = sorted(states)
    index = {s: i for i, s in enumerate(order)}
    matrix = np.zeros((len(order), len(order)))
    for i, s in enumerate(order):
        up_col = index[up(s)]
        down_col = index[down(s)]
        for toward_zero, prob in _branches(float(s), p1, p2):
            matrix[i, up_col if toward_zero else down_col] += prob
    return order, index[start], matrix


def evolve_distribution(
    p0: float, p1: float, p2: float, c: float, horizon: int, max_states: int = 4096
) -> TransitionDistribution:
    """Exact state distribution of single-agent play after horizon rounds.

    Every reachable state is the start value plus an integer multiple of c,
    re-anchored at a boundary after clamping, so the chain lives on a finite
    lattice; the distribution is the start vector times the matrix power.
    Raises when the lattice would exceed max_states.
    """
    for name, value in (("p0", p0), ("p1", p1), ("p2", p2)):
        _check_probability(name, value)
    _check_increment(c)
    if not (isinstance(horizon, int) and horizon >= 0):
        raise ValueError(f"horizon must be a non-negative integer, got {horizon!r}")
    order, start_index, matrix = _lattice_chain(p0, p1, p2, c, max_states)
    mass = np.zeros(len(order))
    mass[start_index] = 1.0
    mass = mass @ np.linalg.matrix_power(matrix, horizon)
    # distinct rationals can collapse to one float once a boundary re-anchors
    # the lattice within an ulp of an older point; merge their masses
    merged: dict[float, float] = {}
    for s, m in zip(order, mass):
        if m > 0.0:
            key = float(s)
            merged[key] = merged.get(key, 0.0) + float(m)
    return TransitionDistribution(tuple(sorted(merged.items())))


@dataclass(frozen=True)
class AsymptoticReport:
    """Long-run single-agent behavior next to the reward-share ratio.

    reward_share is p1 / (p1 + p2), machine 0's share of the combined reward
    rates, included for comparison only; nothing here asserts the simulation
    approaches it. Monte Carlo columns are window-and-trial averages with a
    95 percent confidence halfwidth; chain columns are exact and None when
    the lattice is too large to enumerate.
    """

    p1: float
    p2: float
    c: float
    horizon: int
    trials: int
    seed: int
    initial_p0: float
    window: float
    reward_share: float
    mc_mean_p0: float
    mc_mean_p0_ci: float
    mc_zero_choice_rate: float
    mc_zero_choice_rate_ci: float
    chain_mean_p0: float | None

    def summary(self) -> str:
        lines = [
            f"single-agent long run: p1={self.p1:g} p2={self.p2:g} c={self.c:g} "
            f"horizon={self.horizon} trials={self.trials} seed={self.seed}",
            f"window: final {self.window:.0%} of rounds",
            f"reward share p1/(p1+p2):      {self.reward_share:.6f}",
            f"mean state (simulated):       {self.mc_mean_p0:.6f} +/- {self.mc_mean_p0_ci:.6f}",
            f"machine-0 pick rate:          {self.mc_zero_choice_rate:.6f} "
            f"+/- {self.mc_zero_choice_rate_ci:.6f}",
        ]
        if self.chain_mean_p0 is None:
            lines.append("mean state (exact chain):     unavailable (lattice too large)")
        else:
            lines.append(f"mean state (exact chain):     {self.chain_mean_p0:.6f}")
        return "\n".join(lines)


def asymptotic_claim_report(
    p1: float,
    p2: float,
    c: float,
    horizon: int = 10_000,
    trials: int = 100,
    seed: int = 0,
    initial_p0: float = 0.5,
    window: float = 0.2,
    max_states: int = 4096,
) -> AsymptoticReport:
    """Measure where single-agent play settles and report it against p1/(p1+p2).

    Runs seeded Monte Carlo (one derived stream per trial), averages the
    state and the machine-0 pick rate over the final window of each trial,
    and, when the lattice fits, adds the exact chain average over the same
    window. The report quantifies the comparison; it draws no conclusion.
    """
    from .quantum import RandomStream
    from .bandit import TwoArmBandit
    from .policies import UpdateConfig, single_agent_step

    if not (isinstance(horizon, int) and horizon >= 1):
        raise ValueError(f"horizon must be a positive integer, got {horizon!r}")
    if not (isinstance(trials, int) and trials >= 2):
        raise ValueError(f"trials must be an integer >= 2, got {trials!r}")
    if not 0.0 < window <= 1.0:
        raise ValueError(f"window must be in (0, 1], got {window!r}")
    if p1 + p2 <= 0.0:
        raise ValueError("p1 + p2 must be positive for the reward-share ratio")
    env = TwoArmBandit.from_probs(p1, p2)
    cfg = UpdateConfig(c)
    window_steps = max(1, int(horizon * window))
    start = horizon - window_steps

    mean_states = np.empty(trials)
    zero_rates = np.empty(trials)
    for trial in range(trials):
        rng = RandomStream(seed, stream=trial)
        p0 = initial_p0
        state_acc = 0.0
        zero_picks = 0
        for step in range(horizon):
            p0, record = single_agent_step(p0, env, cfg, rng, step=step)
            if step >= start:
                state_acc += record.p0_after
                if record.machines[0] == 0:
                    zero_picks += 1
        mean_states[trial] = state_acc / window_steps
        zero_rates[trial] = zero_picks / window_steps

    mc_mean_p0 = float(np.mean(mean_states))
    mc_mean_p0_ci = float(1.96 * np.std(mean_states, ddof=1) / math.sqrt(trials))
    mc_zero_rate = float(np.mean(zero_rates))
    mc_zero_rate_ci = float(1.96 * np.std(zero_rates, ddof=1) / math.sqrt(trials))

    try:
        order, start_index, matrix = _lattice_chain(initial_p0, p1, p2, c, max_states)
    except ValueError:
        chain_mean_p0 = None
    else:
        values = np.array([float(s) for s in order])
        mass = np.zeros(len(order))
        mass[start_index] = 1.0
        # window covers the states after rounds start+1 .. horizon
        mass = mass @ np.linalg.matrix_power(matrix, start + 1)
        acc = float(values @ mass)
        for _ in range(window_steps - 1):
            mass = mass @ matrix
            acc += float(values @ mass)
        chain_mean_p0 = acc / window_steps

    return AsymptoticReport(
        p1=p1,
        p2=p2,
        c=c,
        horizon=horizon,
        trials=trials,
        seed=seed,
        initial_p0=initial_p0,
        window=window,
        reward_share=p1 / (p1 + p2),
        mc_mean_p0=mc_mean_p0,
        mc_mean_p0_ci=mc_mean_p0_ci,
        mc_zero_choice_rate=mc_zero_rate,
        mc_zero_choice_rate_ci=mc_zero_rate_ci,
        chain_mean_p0=chain_mean_p0,
    )

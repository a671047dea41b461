"""Exact stochastic simulation (direct method) with reproducible streams.

Each sample owns a Philox counter-based stream derived from
SeedSequence((seed, sample_index)), so results are identical across
platforms and independent across samples regardless of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum, log, sqrt

import numpy as np

from .network import MassAction, ReactionNetwork, SlackGated
from .slack import SlackNetwork

__all__ = [
    "Trajectory",
    "MfptEstimate",
    "simulate",
    "estimate_mfpt",
    "empirical_density",
    "sample_rng",
]


def sample_rng(seed: int, sample: int = 0) -> np.random.Generator:
    """Philox stream for one sample; (seed, sample) fully determines it."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, sample))))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray  # strictly increasing, starting at 0
    states: np.ndarray  # (len(times), d); states[k] holds on [times[k], times[k+1])
    seed: int
    absorbed: bool

    def state_at(self, t: float) -> np.ndarray:
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.states[max(k, 0)]


@dataclass(frozen=True)
class MfptEstimate:
    mean: float
    stderr: float
    n_hit: int
    n_censored: int
    seed: int


def _compile(system) -> list[tuple]:
    """Flatten reactions to (kappa, [(i, order)], delta, [(i, need)]) tuples.

    For a slack network the gate entries index the implicit slack counts;
    deltas then carry the slack change in a parallel tuple.
    """
    if isinstance(system, SlackNetwork):
        net = system.base
        compiled = []
        for r, rx in enumerate(net.reactions):
            alpha = net.complexes[rx.reactant].stoich
            terms = [(i, a) for i, a in enumerate(alpha) if a]
            delta = tuple(int(v) for v in system._gamma[:, r])
            dy = tuple(int(v) for v in (system.product_slack[:, r] - system.reactant_slack[:, r]))
            gates = [(k, int(c)) for k, c in enumerate(system.reactant_slack[:, r]) if c]
            compiled.append((rx.rate_constant, terms, delta, gates, dy))
        return compiled
    net = system
    compiled = []
    for r, rx in enumerate(net.reactions):
        alpha = net.complexes[rx.reactant].stoich
        kin = rx.kinetics
        gated = set(kin.slack_indices) if isinstance(kin, SlackGated) else set()
        terms = [(i, a) for i, a in enumerate(alpha) if a and i not in gated]
        delta = tuple(int(v) for v in (np.asarray(net.complexes[rx.product].stoich)
                                       - np.asarray(alpha)))
        gates = (list(zip(kin.slack_indices, kin.coeffs))
                 if isinstance(kin, SlackGated) else [])
        compiled.append((rx.rate_constant, terms, delta, gates, None))
    return compiled


def _propensity(kappa, terms, x) -> float:
    a = kappa
    for i, order in terms:
        xi = x[i]
        if xi < order:
            return 0.0
        for k in range(order):
            a *= xi - k
    return a


class _Walker:
    """Single-trajectory stepping shared by all estimators."""

    def __init__(self, system, x0):
        self.compiled = _compile(system)
        self.slack = isinstance(system, SlackNetwork)
        if self.slack:
            y0 = system.slack_counts(x0)
            if np.any(y0 < 0):
                raise ValueError("x0 violates the conservation bound")
            self.y0 = tuple(int(v) for v in y0)
        self.x0 = tuple(int(v) for v in x0)

    def reset(self):
        return list(self.x0), (list(self.y0) if self.slack else None)

    def rates(self, x, y):
        out = []
        for kappa, terms, delta, gates, dy in self.compiled:
            a = _propensity(kappa, terms, x)
            if a > 0 and gates:
                ref = y if dy is not None else x
                for i, need in gates:
                    if ref[i] < need:
                        a = 0.0
                        break
            out.append(a)
        return out

    def apply(self, j, x, y):
        kappa, terms, delta, gates, dy = self.compiled[j]
        for i, v in enumerate(delta):
            if v:
                x[i] += v
        if dy is not None and y is not None:
            for i, v in enumerate(dy):
                if v:
                    y[i] += v


def simulate(system, x0, t_end: float, seed: int, max_jumps: int | None = None) -> Trajectory:
    """Direct-method SSA path of the original or slack system up to t_end.

    Stops early (flagged ``absorbed``) when the total rate vanishes; a
    fixed seed reproduces the trajectory bit for bit.
    """
    walker = _Walker(system, x0)
    rng = sample_rng(seed)
    x, y = walker.reset()
    t = 0.0
    times = [0.0]
    states = [tuple(x)]
    absorbed = False
    jumps = 0
    while t < t_end:
        rates = walker.rates(x, y)
        total = fsum(rates)
        if total <= 0.0:
            absorbed = True
            break
        t += rng.exponential(1.0 / total)
        if t >= t_end:
            break
        u = rng.random() * total
        acc = 0.0
        j = len(rates) - 1
        for k, a in enumerate(rates):
            acc += a
            if u < acc:
                j = k
                break
        walker.apply(j, x, y)
        times.append(t)
        states.append(tuple(x))
        jumps += 1
        if max_jumps is not None and jumps >= max_jumps:
            break
    return Trajectory(
        times=np.array(times),
        states=np.array(states, dtype=np.int64),
        seed=seed,
        absorbed=absorbed,
    )


def _target_predicate(target):
    if callable(target):
        return target
    keys = {tuple(int(v) for v in x) for x in target}
    return lambda x: tuple(x) in keys


def estimate_mfpt(system, x0, target, n: int, seed: int,
                  t_cap: float | None = None) -> MfptEstimate:
    """Monte Carlo mean first passage time to the target set.

    Runs n independent trajectories; runs that are absorbed away from the
    target or exceed ``t_cap`` are counted as censored and excluded from
    the mean, never silently folded in.  Raises when every run is censored.
    """
    if n < 2:
        raise ValueError("need at least 2 samples")
    walker = _Walker(system, x0)
    hit = _target_predicate(target)
    hits = []
    censored = 0
    for sample in range(n):
        rng = sample_rng(seed, sample)
        x, y = walker.reset()
        if hit(tuple(x)):
            hits.append(0.0)
            continue
        t = 0.0
        while True:
            rates = walker.rates(x, y)
            total = fsum(rates)
            if total <= 0.0:
                censored += 1
                break
            t += rng.exponential(1.0 / total)
            if t_cap is not None and t > t_cap:
                censored += 1
                break
            u = rng.random() * total
            acc = 0.0
            j = len(rates) - 1
            for k, a in enumerate(rates):
                acc += a
                if u < acc:
                    j = k
                    break
            walker.apply(j, x, y)
            if hit(tuple(x)):
                hits.append(t)
                break
    if not hits:
        raise RuntimeError("all runs censored; raise t_cap or check accessibility")
    mean = fsum(hits) / len(hits)
    if len(hits) > 1:
        var = fsum((h - mean) ** 2 for h in hits) / (len(hits) - 1)
        stderr = sqrt(var / len(hits))
    else:
        stderr = float("inf")
    return MfptEstimate(mean=mean, stderr=stderr, n_hit=len(hits),
                        n_censored=censored, seed=seed)


def empirical_density(system, x0, t: float, n: int, seed: int) -> dict[tuple, float]:
    """Fraction of n trajectories occupying each state at time t."""
    if n < 1:
        raise ValueError("need at least 1 sample")
    walker = _Walker(system, x0)
    counts: dict[tuple, int] = {}
    for sample in range(n):
        rng = sample_rng(seed, sample)
        x, y = walker.reset()
        elapsed = 0.0
        while True:
            rates = walker.rates(x, y)
            total = fsum(rates)
            if total <= 0.0:
                break
            elapsed += rng.exponential(1.0 / total)
            if elapsed > t:
                break
            u = rng.random() * total
            acc = 0.0
            j = len(rates) - 1
            for k, a in enumerate(rates):
                acc += a
                if u < acc:
                    j = k
                    break
            walker.apply(j, x, y)
        key = tuple(x)
        counts[key] = counts.get(key, 0) + 1
    return {k: v / n for k, v in sorted(counts.items())}

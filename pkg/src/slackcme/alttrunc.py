"""Competing truncations over the same regions: FSP, sFSP, finite buffer.

All three keep the original kinetics and differ only in what happens to
probability flux that would leave the region: FSP sends it to one extra
absorbing sink state, sFSP redirects it to a designated interior return
state, and the finite buffer zeroes any reaction whose destination would
violate the buffer inequality (which can create absorbing states).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iter_product

import numpy as np

from .network import NetworkError, ReactionNetwork, build_matrices, mass_action_rates
from .statespace import Generator, StateSpace, assemble_generator, enumerate_halfspace

__all__ = [
    "Rectangle",
    "HalfSpaceSet",
    "build_fsp",
    "build_sfsp",
    "build_finite_buffer",
]


@dataclass(frozen=True)
class Rectangle:
    """Per-species upper bounds; membership is 0 <= x <= bounds."""

    bounds: tuple[int, ...]

    def contains(self, x) -> bool:
        return all(0 <= v <= b for v, b in zip(x, self.bounds))

    def enumerate(self) -> StateSpace:
        raw = list(iter_product(*(range(b + 1) for b in self.bounds)))
        arr = np.array(raw, dtype=np.int64)
        grade = arr.sum(axis=1)
        order = np.lexsort(tuple(arr[:, c] for c in range(arr.shape[1] - 1, -1, -1)) + (grade,))
        return StateSpace(arr[order])


@dataclass(frozen=True)
class HalfSpaceSet:
    """States with W x <= N component-wise (shared with the slack method)."""

    W: tuple
    N: tuple

    def contains(self, x) -> bool:
        W = np.atleast_2d(np.asarray(self.W, dtype=np.int64))
        N = np.atleast_1d(np.asarray(self.N, dtype=np.int64))
        return bool(np.all(W @ np.asarray(x, dtype=np.int64) <= N))

    def enumerate(self) -> StateSpace:
        return enumerate_halfspace(self.W, self.N)


def _region_space(region) -> StateSpace:
    space = region.enumerate()
    if not len(space):
        raise NetworkError("region is empty")
    return space


def _transitions(net: ReactionNetwork, space: StateSpace):
    """Yield (reaction, source indices, rates, target states) per reaction."""
    gamma = build_matrices(net).Gamma
    for r in range(net.n_reactions):
        rates = mass_action_rates(net, r, space.states)
        src = np.flatnonzero(rates > 0)
        if src.size:
            yield r, src, rates[src], space.states[src] + gamma[:, r]


def build_fsp(net: ReactionNetwork, region, x0=None) -> Generator:
    """Finite state projection: region states plus one absorbing sink.

    Every transition leaving the region is redirected to the sink, whose
    row is zero; the sink occupies the last index.
    """
    space = _region_space(region)
    if x0 is not None and not space.contains(x0):
        raise NetworkError("region excludes x0")
    n = len(space)
    sink = n
    rows, cols, vals = [], [], []
    for _, src, rates, targets in _transitions(net, space):
        for s, rate, t in zip(src, rates, targets):
            key = tuple(int(v) for v in t)
            rows.append(int(s))
            cols.append(space.index.get(key, sink))
            vals.append(float(rate))
    return assemble_generator(n + 1, rows, cols, vals, space, sink=sink)


def build_sfsp(net: ReactionNetwork, region, x_star, x0=None) -> Generator:
    """Stationary FSP: escaping transitions return to the designated state
    x_star inside the region; parallel escapes merge by rate addition."""
    space = _region_space(region)
    if not space.contains(x_star):
        raise NetworkError("designated return state is outside the region")
    if x0 is not None and not space.contains(x0):
        raise NetworkError("region excludes x0")
    star = space.position(x_star)
    rows, cols, vals = [], [], []
    for _, src, rates, targets in _transitions(net, space):
        for s, rate, t in zip(src, rates, targets):
            key = tuple(int(v) for v in t)
            rows.append(int(s))
            cols.append(space.index.get(key, star))
            vals.append(float(rate))
    return assemble_generator(len(space), rows, cols, vals, space)


def build_finite_buffer(net: ReactionNetwork, W, N, x0=None) -> Generator:
    """Finite buffer truncation on W x <= N: a reaction's rate is zero
    whenever its destination violates the inequality.  No redirection, so
    boundary states can become absorbing."""
    space = enumerate_halfspace(W, N)
    if x0 is not None and not space.contains(x0):
        raise NetworkError("x0 violates the buffer capacity")
    rows, cols, vals = [], [], []
    for _, src, rates, targets in _transitions(net, space):
        for s, rate, t in zip(src, rates, targets):
            key = tuple(int(v) for v in t)
            idx = space.index.get(key)
            if idx is not None:
                rows.append(int(s))
                cols.append(idx)
                vals.append(float(rate))
    return assemble_generator(len(space), rows, cols, vals, space)

"""Conservation laws of the stoichiometry matrix.

Exact rational left-nullspace computation plus helpers to decide which
species are intrinsically bounded (carry positive weight in some
non-negative conservation vector).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import numpy as np

from .network import ReactionNetwork, build_matrices

__all__ = [
    "left_nullspace_basis",
    "nonnegative_laws",
    "intrinsically_bounded",
]


def _rref(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    if not rows:
        return rows
    ncols = len(rows[0])
    pivot_row = 0
    pivots = []
    for col in range(ncols):
        pivot = None
        for i in range(pivot_row, len(rows)):
            if rows[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        rows[pivot_row], rows[pivot] = rows[pivot], rows[pivot_row]
        pv = rows[pivot_row][col]
        rows[pivot_row] = [v / pv for v in rows[pivot_row]]
        for i in range(len(rows)):
            if i != pivot_row and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[pivot_row])]
        pivots.append(col)
        pivot_row += 1
        if pivot_row == len(rows):
            break
    return [rows[i] for i in range(pivot_row)], pivots


def _primitive_integer(vec: list[Fraction]) -> np.ndarray:
    den = 1
    for v in vec:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in vec]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return np.array(ints, dtype=np.int64)


def left_nullspace_basis(gamma) -> list[np.ndarray]:
    """Primitive integer basis of {r : r^T Gamma = 0}, via exact RREF."""
    gamma = np.asarray(gamma)
    d = gamma.shape[0]
    # Nullspace of Gamma^T: RREF on Gamma^T, read off free-variable vectors.
    rows = [[Fraction(int(v)) for v in row] for row in gamma.T]
    reduced, pivots = _rref(rows)
    free = [c for c in range(d) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * d
        vec[fc] = Fraction(1)
        for row, pc in zip(reduced, pivots):
            vec[pc] = -row[fc]
        basis.append(_primitive_integer(vec))
    return basis


def _lp_law(gamma_int, target: int, support: np.ndarray | None = None):
    """Non-negative r with r^T Gamma = 0, r[target] >= 1, via LP; or None."""
    from scipy.optimize import linprog

    gamma_int = np.asarray(gamma_int, dtype=np.int64)
    gamma = gamma_int.astype(np.float64)
    d = gamma.shape[0]
    bounds = []
    for i in range(d):
        if support is not None and not support[i]:
            bounds.append((0.0, 0.0))
        elif i == target:
            bounds.append((1.0, None))
        else:
            bounds.append((0.0, None))
    res = linprog(
        c=np.ones(d),
        A_eq=gamma.T,
        b_eq=np.zeros(gamma.shape[1]),
        bounds=bounds,
        method="highs",
    )
    if not res.success:
        return None
    frac = [Fraction(float(v)).limit_denominator(10**6) for v in res.x]
    cand = _primitive_integer(frac)
    if np.any(cand < 0) or cand[target] < 1:
        return None
    if np.any(cand @ gamma_int != 0):
        return None
    return cand


def nonnegative_laws(net: ReactionNetwork, support: np.ndarray | None = None) -> list[np.ndarray]:
    """Non-negative integer conservation vectors, optionally restricted to a
    species support mask.  Basis vectors that already qualify are returned
    first; species not covered get an LP attempt.
    """
    gamma = build_matrices(net).Gamma
    laws = []
    covered = np.zeros(net.n_species, dtype=bool)
    for vec in left_nullspace_basis(gamma):
        if np.any(vec < 0):
            if np.all(vec <= 0):
                vec = -vec
            else:
                continue
        if support is not None and np.any(vec[~support] != 0):
            continue
        laws.append(vec)
        covered |= vec > 0
    targets = np.arange(net.n_species) if support is None else np.flatnonzero(support)
    for i in targets:
        if covered[i]:
            continue
        vec = _lp_law(gamma, int(i), support)
        if vec is not None:
            laws.append(vec)
            covered |= vec > 0
    return laws


def intrinsically_bounded(net: ReactionNetwork) -> np.ndarray:
    """Mask: species carrying positive weight in some non-negative law."""
    mask = np.zeros(net.n_species, dtype=bool)
    for vec in nonnegative_laws(net):
        mask |= vec > 0
    return mask

"""Truncated state spaces, sparse generators, and reachability analysis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .conservation import nonnegative_laws
from .network import NetworkError, ReactionNetwork
from .slack import SlackNetwork, slack_rates

__all__ = [
    "StateSpace",
    "Generator",
    "enumerate_states",
    "enumerate_halfspace",
    "build_generator",
    "CommClass",
    "communication_classes",
    "accessibility",
]


class StateSpace:
    """Ordered enumeration of admissible states with an index map.

    States are sorted by grade (the largest conservation-row utilization,
    which is w.x for a single row) and then lexicographically, so the
    space at bound N is an index prefix of the space at any larger bound.
    """

    def __init__(self, states: np.ndarray, W=None, N=None, eq_laws=None, eq_values=None):
        self.states = np.asarray(states, dtype=np.int64)
        if self.states.ndim != 2:
            raise ValueError("states must be a (n, d) matrix")
        self.W = None if W is None else np.atleast_2d(np.asarray(W, dtype=np.int64))
        self.N = None if N is None else np.atleast_1d(np.asarray(N, dtype=np.int64))
        self.eq_laws = [] if eq_laws is None else [np.asarray(v, dtype=np.int64) for v in eq_laws]
        self.eq_values = [] if eq_values is None else [int(v) for v in eq_values]
        self.index = {tuple(int(v) for v in row): i for i, row in enumerate(self.states)}
        if len(self.index) != len(self.states):
            raise ValueError("duplicate states")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def position(self, x) -> int:
        key = tuple(int(v) for v in x)
        if key not in self.index:
            raise KeyError(f"state {key} not in the state space")
        return self.index[key]

    def contains(self, x) -> bool:
        return tuple(int(v) for v in x) in self.index

    def positions(self, xs) -> np.ndarray:
        return np.array([self.position(x) for x in xs], dtype=np.intp)

    def is_prefix_of(self, other: "StateSpace") -> bool:
        """True when this space's states are exactly other.states[:n]."""
        n = len(self)
        if n > len(other) or self.dim != other.dim:
            return False
        return bool(np.array_equal(self.states, other.states[:n]))

    def target_mask(self, target) -> np.ndarray:
        """Boolean mask from a predicate over states or a collection of states."""
        if callable(target):
            return np.fromiter((bool(target(x)) for x in self.states), dtype=bool, count=len(self))
        mask = np.zeros(len(self), dtype=bool)
        hit = False
        for x in target:
            key = tuple(int(v) for v in x)
            if key in self.index:
                mask[self.index[key]] = True
                hit = True
        if not hit:
            raise NetworkError("target set is disjoint from the state space")
        return mask

    def __repr__(self):
        return f"StateSpace({len(self)} states, dim={self.dim})"


def _grade(states: np.ndarray, W: np.ndarray) -> np.ndarray:
    if W.size == 0:
        return np.zeros(len(states), dtype=np.int64)
    return (states @ W.T).max(axis=1)


def _sorted_states(raw: list[tuple[int, ...]], W: np.ndarray) -> np.ndarray:
    if not raw:
        return np.zeros((0, W.shape[1]), dtype=np.int64)
    arr = np.array(raw, dtype=np.int64)
    grade = _grade(arr, W)
    order = np.lexsort(tuple(arr[:, c] for c in range(arr.shape[1] - 1, -1, -1)) + (grade,))
    return arr[order]


def enumerate_halfspace(W, N, eq_laws=(), eq_values=(), d=None) -> StateSpace:
    """All non-negative integer x with W x <= N (and optional equality
    constraints r.x = v), in graded lexicographic order."""
    W = np.atleast_2d(np.asarray(W, dtype=np.int64))
    N = np.atleast_1d(np.asarray(N, dtype=np.int64))
    d = W.shape[1] if d is None else d
    eq_laws = [np.asarray(v, dtype=np.int64) for v in eq_laws]
    eq_values = [int(v) for v in eq_values]

    rows = [(W[i], int(N[i]), False) for i in range(W.shape[0]) if np.any(W[i])]
    rows += [(law, val, True) for law, val in zip(eq_laws, eq_values)]

    out: list[tuple[int, ...]] = []
    x = [0] * d

    def bound(i, slack):
        b = None
        for row, rem, _ in slack:
            if row[i] > 0:
                cand = rem // row[i]
                b = cand if b is None else min(b, cand)
        return b

    def recurse(i, slack):
        if i == d:
            if all(rem == 0 for row, rem, is_eq in slack if is_eq):
                out.append(tuple(x))
            return
        hi = bound(i, slack)
        if hi is None:
            raise NetworkError(
                f"species index {i} is unbounded: zero coefficient in every "
                "conservation row and no intrinsic bound"
            )
        for v in range(hi + 1):
            x[i] = v
            nxt = [(row, rem - row[i] * v, is_eq) for row, rem, is_eq in slack]
            if all(rem >= 0 for _, rem, _ in nxt):
                recurse(i + 1, nxt)
        x[i] = 0

    recurse(0, rows)
    return StateSpace(_sorted_states(out, W), W=W, N=N, eq_laws=eq_laws, eq_values=eq_values)


def enumerate_states(snet: SlackNetwork, x0=None) -> StateSpace:
    """State space of a slack network: W x <= N, plus equality constraints
    from the base network's conservation laws for species that W leaves
    unweighted (their level is pinned by x0, which is then required).
    """
    W, N = snet.spec.W, snet.spec.N
    d = snet.base.n_species
    uncovered = ~(W > 0).any(axis=0)
    eq_laws: list[np.ndarray] = []
    eq_values: list[int] = []
    if np.any(uncovered):
        laws = nonnegative_laws(snet.base, support=uncovered)
        covered = np.zeros(d, dtype=bool)
        for law in laws:
            covered |= law > 0
        missing = uncovered & ~covered
        if np.any(missing):
            names = [snet.base.species[i].name for i in np.flatnonzero(missing)]
            raise NetworkError(
                f"unbounded species: {', '.join(names)} (zero coefficient in every "
                "conservation row and no intrinsic bound)"
            )
        if x0 is None:
            raise NetworkError(
                "x0 is required to pin intrinsic conservation levels for species "
                "not weighted by W"
            )
        x0 = np.asarray(x0, dtype=np.int64)
        for law in laws:
            eq_laws.append(law)
            eq_values.append(int(law @ x0))
    if x0 is not None and np.any(W @ np.asarray(x0, dtype=np.int64) > N):
        raise NetworkError("x0 violates the conservation bound")
    return enumerate_halfspace(W, N, eq_laws, eq_values, d=d)


@dataclass(frozen=True)
class Generator:
    """Sparse transition-rate matrix over a state space.

    ``matrix`` carries the diagonal (negated off-diagonal row sums); rows
    sum to zero.  ``sink`` is the index of an extra absorbing pseudo-state
    appended by the leaky truncation, or None.
    """

    matrix: sp.csr_matrix
    space: StateSpace
    sink: int | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def row_sum_error(self) -> float:
        return float(np.abs(self.matrix.sum(axis=1)).max()) if self.dim else 0.0

    def state_index(self, x) -> int:
        return self.space.position(x)


def assemble_generator(n: int, rows, cols, vals, space: StateSpace, sink=None) -> Generator:
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    diag = -np.asarray(mat.sum(axis=1)).ravel()
    mat = (mat + sp.diags(diag)).tocsr()
    return Generator(matrix=mat, space=space, sink=sink)


def build_generator(space: StateSpace, snet: SlackNetwork) -> Generator:
    """Rate matrix of the slack system on ``space``.

    The indicator gating guarantees every positive-rate transition lands
    inside the space; that is asserted, never silently dropped.
    """
    n = len(space)
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    for r in range(snet.base.n_reactions):
        rates = slack_rates(snet, r, space.states)
        src = np.flatnonzero(rates > 0)
        if not src.size:
            continue
        targets = space.states[src] + snet._gamma[:, r]
        idx = np.empty(len(src), dtype=np.intp)
        for k, t in enumerate(targets):
            key = tuple(int(v) for v in t)
            if key not in space.index:
                raise AssertionError(
                    f"positive-rate transition exits the state space: {key} via reaction {r}"
                )
            idx[k] = space.index[key]
        rows.append(src)
        cols.append(idx)
        vals.append(rates[src])
    if rows:
        return assemble_generator(
            n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), space
        )
    return assemble_generator(n, [], [], [], space)


@dataclass(frozen=True)
class CommClass:
    members: np.ndarray  # sorted state indices
    closed: bool

    @property
    def absorbing(self) -> bool:
        return self.closed and len(self.members) == 1


def _positive_adjacency(gen: Generator) -> sp.csr_matrix:
    mat = gen.matrix.tocoo()
    keep = (mat.row != mat.col) & (mat.data > 0)
    return sp.csr_matrix(
        (np.ones(int(keep.sum())), (mat.row[keep], mat.col[keep])), shape=mat.shape
    )


def communication_classes(gen: Generator, root=None) -> list[CommClass]:
    """Strongly connected classes of the positive-rate digraph.

    A class is closed when no positive rate leaves it; absorbing states are
    singleton closed classes.  With ``root`` (a state or index), only the
    subchain reachable from it is classified.  Classes are ordered by their
    smallest member index.
    """
    adj = _positive_adjacency(gen)
    keep = None
    if root is not None:
        start = root if isinstance(root, (int, np.integer)) else gen.state_index(root)
        order = csgraph.breadth_first_order(adj, int(start), directed=True, return_predecessors=False)
        keep = np.zeros(gen.dim, dtype=bool)
        keep[order] = True
    n_comp, labels = csgraph.connected_components(adj, directed=True, connection="strong")
    out = []
    coo = adj.tocoo()
    leaky = np.zeros(n_comp, dtype=bool)
    cross = labels[coo.row] != labels[coo.col]
    leaky[labels[coo.row[cross]]] = True
    for c in range(n_comp):
        members = np.flatnonzero(labels == c)
        if keep is not None:
            members = members[keep[members]]
            if not members.size:
                continue
        out.append(CommClass(members=members, closed=not leaky[c]))
    out.sort(key=lambda cc: int(cc.members[0]))
    return out


def accessibility(gen: Generator, source, target) -> bool:
    """Whether some state of the target set is reachable from ``source`` in
    the positive-rate digraph.  A target disjoint from the space is an
    error, distinct from an unreachable one."""
    mask = gen.space.target_mask(target)
    if gen.sink is not None:
        mask = np.concatenate([mask, [False]])
    start = gen.state_index(source) if not isinstance(source, (int, np.integer)) else int(source)
    if mask[start]:
        return True
    adj = _positive_adjacency(gen)
    order = csgraph.breadth_first_order(adj, start, directed=True, return_predecessors=False)
    return bool(mask[order].any())

"""Direct solvers on truncated generators.

Stationary distributions by a bordered sparse LU solve, transient
densities by uniformization, mean first passage times by the truncated
rate matrix, survival curves via the absorbing chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph
from scipy.sparse.linalg import splu
from scipy.stats import poisson

from .network import NetworkError
from .statespace import CommClass, Generator, StateSpace, communication_classes

__all__ = [
    "Distribution",
    "FptResult",
    "SolverError",
    "NonAccessibleTarget",
    "point_mass",
    "stationary",
    "transient",
    "mfpt",
    "survival",
    "l1_distance",
]

RESIDUAL_TOL = 1e-10
MASS_TOL = 1e-10
POISSON_TAIL = 1e-12


class SolverError(RuntimeError):
    pass


class NonAccessibleTarget(SolverError):
    """The target set cannot be reached (or not almost surely reached)."""


@dataclass(frozen=True)
class Distribution:
    """Probability vector over a state space (non-negative, sums to one)."""

    space: StateSpace
    p: np.ndarray
    residual: float | None = None

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        object.__setattr__(self, "p", p)
        if p.shape != (len(self.space),):
            raise ValueError("probability vector length does not match the space")
        if np.any(p < -1e-12):
            raise ValueError("negative probability")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")

    def prob(self, x) -> float:
        return float(self.p[self.space.position(x)])


@dataclass(frozen=True)
class FptResult:
    mean: float
    source: tuple
    target_mask: np.ndarray
    residual: float | None = None
    survival: tuple[np.ndarray, np.ndarray] | None = None  # (t grid, P(tau > t))


def point_mass(space: StateSpace, x) -> Distribution:
    p = np.zeros(len(space))
    p[space.position(x)] = 1.0
    return Distribution(space, p)


def _as_vector(gen: Generator, p0) -> np.ndarray:
    if isinstance(p0, Distribution):
        v = p0.p
        if len(v) == gen.dim:
            return v.astype(np.float64, copy=True)
        if gen.sink is not None and len(v) == gen.dim - 1:
            return np.concatenate([v, [0.0]])
        raise ValueError("distribution does not match the generator dimension")
    v = np.asarray(p0, dtype=np.float64)
    if v.shape != (gen.dim,):
        raise ValueError("initial vector length does not match the generator")
    return v.copy()


def _matrix_inf_norm(mat: sp.csr_matrix) -> float:
    if mat.nnz == 0:
        return 0.0
    return float(np.abs(mat).sum(axis=1).max())


def stationary(gen: Generator, members=None, residual_tol: float = RESIDUAL_TOL) -> Distribution:
    """Stationary distribution pi with pi^T A = 0 and sum(pi) = 1.

    The chain must have a single closed communication class, or the caller
    passes one (``members``: a CommClass or index array from
    communication_classes).  One equation of the transposed rank-deficient
    system is replaced by the normalization row, solved by sparse LU with
    one step of iterative refinement; the relative residual
    ||pi^T A||_inf / ||A||_inf is checked against ``residual_tol``.
    """
    if gen.sink is not None:
        raise SolverError("stationary distribution of a leaky (sink) generator is degenerate")
    if members is None:
        closed = [c for c in communication_classes(gen) if c.closed]
        if len(closed) != 1:
            raise SolverError(
                f"{len(closed)} closed communication classes; pass the intended one"
            )
        members = closed[0]
    if isinstance(members, CommClass):
        members = members.members
    members = np.asarray(members, dtype=np.intp)

    sub = gen.matrix[members][:, members].tocsc()
    n = len(members)
    B = sub.T.tolil()
    B[0, :] = 1.0
    B = B.tocsc()
    rhs = np.zeros(n)
    rhs[0] = 1.0
    lu = splu(B)
    pi = lu.solve(rhs)
    pi += lu.solve(rhs - B @ pi)  # one step of iterative refinement

    if np.any(pi < -1e-9):
        raise SolverError("stationary solve produced significantly negative entries")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()

    res = float(np.abs(pi @ sub).max())
    norm = _matrix_inf_norm(sub)
    if norm > 0 and res > residual_tol * norm:
        raise SolverError(f"stationary residual {res:.3e} exceeds {residual_tol:.1e} * ||A||")

    full = np.zeros(gen.dim)
    full[members] = pi
    return Distribution(gen.space, full, residual=res)


def _uniformized(gen: Generator):
    lam = float(np.abs(gen.matrix.diagonal()).max()) if gen.dim else 0.0
    if lam == 0.0:
        return 0.0, None
    P = (sp.eye(gen.dim, format="csr") + gen.matrix / lam).T.tocsr()
    return lam, P


def transient(gen: Generator, p0, t: float, tail: float = POISSON_TAIL):
    """Density at time t by uniformization.

    Poisson weights are cut two-sided at ``tail`` and renormalized, which
    conserves mass to well under the tail.  Returns the same kind of object
    it was given (Distribution in, Distribution out).
    """
    if t < 0:
        raise ValueError("time must be non-negative")
    v = _as_vector(gen, p0)
    lam, PT = _uniformized(gen)
    rate = lam * t
    if rate == 0.0:
        out = v
    else:
        kmin = int(poisson.ppf(tail / 2, rate)) if rate > 1 else 0
        kmin = max(kmin - 1, 0)
        kmax = int(poisson.isf(tail / 2, rate)) + 1
        ks = np.arange(kmin, kmax + 1)
        w = poisson.pmf(ks, rate)
        w /= w.sum()
        acc = np.zeros_like(v)
        for k in range(kmax + 1):
            if k >= kmin:
                acc += w[k - kmin] * v
            if k < kmax:
                v = PT @ v
        out = acc
    if abs(out.sum() - 1.0) > max(MASS_TOL, 10 * tail):
        raise SolverError(f"uniformization lost probability mass: sum = {out.sum()!r}")
    out /= out.sum()
    if isinstance(p0, Distribution) and gen.sink is None:
        return Distribution(gen.space, np.clip(out, 0.0, None) / max(out.sum(), 1.0))
    return out


def _reachable(adj: sp.csr_matrix, start: int) -> np.ndarray:
    order = csgraph.breadth_first_order(adj, start, directed=True, return_predecessors=False)
    mask = np.zeros(adj.shape[0], dtype=bool)
    mask[order] = True
    return mask


def mfpt(gen: Generator, target, x0) -> FptResult:
    """Mean first passage time from x0 to the target set.

    Removes the target rows/columns from the generator restricted to the
    states reachable from x0 and solves Q m = -1 by sparse LU.  Raises
    NonAccessibleTarget when the target cannot be reached, or when some
    reachable state cannot reach it (the hitting time is then infinite
    with positive probability).
    """
    mask = gen.space.target_mask(target)
    if gen.sink is not None:
        mask = np.concatenate([mask, [False]])
    start = gen.state_index(x0)
    if mask[start]:
        return FptResult(mean=0.0, source=tuple(int(v) for v in x0), target_mask=mask)

    coo = gen.matrix.tocoo()
    keep = (coo.row != coo.col) & (coo.data > 0)
    adj = sp.csr_matrix(
        (np.ones(int(keep.sum())), (coo.row[keep], coo.col[keep])), shape=coo.shape
    )
    reach = _reachable(adj, start)
    if not mask[reach].any():
        raise NonAccessibleTarget("non-accessible target")
    # Backward reachability from the target within the forward-reachable set.
    radj = adj.T.tocsr()
    seeds = np.flatnonzero(mask & reach)
    can_hit = np.zeros(gen.dim, dtype=bool)
    frontier = list(seeds)
    can_hit[seeds] = True
    while frontier:
        nxt = radj[frontier].tocoo().col
        nxt = np.unique(nxt)
        fresh = nxt[~can_hit[nxt]]
        can_hit[fresh] = True
        frontier = list(fresh)
    stranded = reach & ~can_hit
    if stranded.any():
        raise NonAccessibleTarget(
            "target not almost surely reached: "
            f"{int(stranded.sum())} reachable state(s) cannot reach it"
        )

    sub_idx = np.flatnonzero(reach & ~mask)
    Q = gen.matrix[sub_idx][:, sub_idx].tocsc()
    rhs = -np.ones(len(sub_idx))
    lu = splu(Q)
    m = lu.solve(rhs)
    m += lu.solve(rhs - Q @ m)
    res = float(np.abs(Q @ m - rhs).max())
    pos = int(np.searchsorted(sub_idx, start))
    return FptResult(
        mean=float(m[pos]),
        source=tuple(int(v) for v in x0),
        target_mask=mask,
        residual=res,
    )


def survival(gen: Generator, target, x0, ts) -> FptResult:
    """Survival curve P(tau > t) on a time grid, via the absorbing chain
    (target rows zeroed) and uniformization; also returns the quadrature
    of the curve as a crude mean when the grid covers the decay."""
    ts = np.asarray(ts, dtype=np.float64)
    if np.any(ts < 0) or np.any(np.diff(ts) <= 0):
        raise ValueError("time grid must be non-negative and strictly increasing")
    mask = gen.space.target_mask(target)
    if gen.sink is not None:
        mask = np.concatenate([mask, [False]])
    start = gen.state_index(x0)

    mat = gen.matrix.tolil()
    for i in np.flatnonzero(mask):
        mat.rows[i] = []
        mat.data[i] = []
    absorbed = Generator(matrix=mat.tocsr(), space=gen.space, sink=gen.sink)

    v = np.zeros(gen.dim)
    v[start] = 1.0
    out = np.empty(len(ts))
    prev = 0.0
    for i, t in enumerate(ts):
        v = transient(absorbed, v, t - prev)
        prev = t
        out[i] = float(v[~mask].sum())
    grid = np.concatenate([[0.0], ts]) if ts[0] > 0 else ts
    curve = np.concatenate([[1.0 if not mask[start] else 0.0], out]) if ts[0] > 0 else out
    mean = float(np.trapezoid(curve, grid))
    return FptResult(
        mean=mean,
        source=tuple(int(v) for v in x0),
        target_mask=mask,
        survival=(ts, out),
    )


def l1_distance(p: Distribution, q: Distribution) -> float:
    """Sum of absolute differences; distributions over nested spaces are
    compared through the prefix embedding, counting missing states as 0."""
    a, b = p, q
    if len(a.space) > len(b.space):
        a, b = b, a
    if a.space is not b.space and not a.space.is_prefix_of(b.space):
        raise NetworkError("state spaces are not comparable (no prefix embedding)")
    n = len(a.space)
    return float(np.abs(a.p - b.p[:n]).sum() + np.abs(b.p[n:]).sum())

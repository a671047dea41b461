"""Reaction networks: species, complexes, reactions, structural matrices.

A network is stored as an ordered species list, a deduplicated ordered
complex list, and directed reactions between complex indices.  All graph
and matrix quantities derive deterministically from these orderings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "Species",
    "Complex",
    "MassAction",
    "SlackGated",
    "Reaction",
    "ReactionNetwork",
    "StructuralMatrices",
    "NetworkError",
    "build_matrices",
    "intensity",
    "mass_action_rates",
    "linkage_classes",
    "weak_reversibility",
    "WeakReversibilityReport",
    "deficiency",
    "integer_rank",
]


class NetworkError(ValueError):
    """Structural invariant of a reaction network is violated."""


@dataclass(frozen=True)
class Species:
    name: str
    index: int


@dataclass(frozen=True)
class Complex:
    """Non-negative species counts; the all-zero vector is the empty complex."""

    stoich: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.stoich):
            raise NetworkError(f"complex has negative coefficient: {self.stoich}")

    @property
    def is_empty(self) -> bool:
        return not any(self.stoich)


@dataclass(frozen=True)
class MassAction:
    """Standard stochastic mass-action kinetics (falling-factorial rates)."""


@dataclass(frozen=True)
class SlackGated:
    """Mass action on ordinary species, indicator gates on slack species.

    ``slack_indices[k]`` must hold at least ``coeffs[k]`` copies for the
    reaction to fire; those species contribute no falling-factorial term.
    """

    slack_indices: tuple[int, ...]
    coeffs: tuple[int, ...]


@dataclass(frozen=True)
class Reaction:
    reactant: int  # complex index
    product: int  # complex index
    rate_constant: float
    kinetics: MassAction | SlackGated = field(default_factory=MassAction)

    def __post_init__(self):
        if self.reactant == self.product:
            raise NetworkError("reactant equals product")
        if not self.rate_constant > 0:
            raise NetworkError(f"rate constant must be positive, got {self.rate_constant}")


class ReactionNetwork:
    """Immutable reaction network over an ordered species list.

    Parameters
    ----------
    species : sequence of str or Species
        Species in their canonical order.
    complexes : sequence of Complex or stoichiometry tuples
        Distinct complexes; every one must be used by some reaction.
    reactions : sequence of Reaction
    """

    def __init__(self, species, complexes, reactions):
        named = []
        for i, s in enumerate(species):
            if isinstance(s, Species):
                if s.index != i:
                    raise NetworkError(f"species {s.name} has index {s.index}, expected {i}")
                named.append(s)
            else:
                named.append(Species(str(s), i))
        names = [s.name for s in named]
        if len(set(names)) != len(names):
            raise NetworkError("duplicate species names")
        self.species: tuple[Species, ...] = tuple(named)

        cx = []
        for c in complexes:
            c = c if isinstance(c, Complex) else Complex(tuple(int(v) for v in c))
            if len(c.stoich) != len(named):
                raise NetworkError("complex length does not match species count")
            cx.append(c)
        if len({c.stoich for c in cx}) != len(cx):
            raise NetworkError("complexes are not distinct")
        self.complexes: tuple[Complex, ...] = tuple(cx)

        rxns = tuple(reactions)
        if not rxns:
            raise NetworkError("no reactions")
        seen = set()
        used = set()
        for r in rxns:
            if not (0 <= r.reactant < len(cx) and 0 <= r.product < len(cx)):
                raise NetworkError("reaction references unknown complex")
            if (r.reactant, r.product) in seen:
                raise NetworkError(
                    f"duplicate reaction {self.format_complex(r.reactant)} -> "
                    f"{self.format_complex(r.product)}"
                )
            seen.add((r.reactant, r.product))
            used.update((r.reactant, r.product))
        if used != set(range(len(cx))):
            raise NetworkError("complex not referenced by any reaction")
        self.reactions: tuple[Reaction, ...] = tuple(rxns)

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_complexes(self) -> int:
        return len(self.complexes)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    def species_names(self) -> list[str]:
        return [s.name for s in self.species]

    def species_index(self, name: str) -> int:
        for s in self.species:
            if s.name == name:
                return s.index
        raise KeyError(name)

    def reaction_vector(self, r: int) -> np.ndarray:
        """Net species change of reaction ``r`` (product minus reactant)."""
        rx = self.reactions[r]
        a = np.asarray(self.complexes[rx.reactant].stoich, dtype=np.int64)
        b = np.asarray(self.complexes[rx.product].stoich, dtype=np.int64)
        return b - a

    def format_complex(self, c: int) -> str:
        stoich = self.complexes[c].stoich
        terms = []
        for s, k in zip(self.species, stoich):
            if k == 0:
                continue
            terms.append(s.name if k == 1 else f"{k}{s.name}")
        return " + ".join(terms) if terms else "0"

    def __repr__(self):
        return (
            f"ReactionNetwork({self.n_species} species, {self.n_complexes} complexes, "
            f"{self.n_reactions} reactions)"
        )


@dataclass(frozen=True)
class StructuralMatrices:
    """Connectivity S (complexes x reactions), complex matrix C (species x
    complexes) and stoichiometry Gamma = C S (species x reactions)."""

    S: np.ndarray
    C: np.ndarray
    Gamma: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "S": self.S.tolist(),
            "C": self.C.tolist(),
            "Gamma": self.Gamma.tolist(),
        }


def build_matrices(net: ReactionNetwork) -> StructuralMatrices:
    """Assemble the connectivity, complex and stoichiometry matrices.

    Each column of S carries a single -1 (reactant complex) and +1
    (product complex); Gamma = C S holds exactly in integer arithmetic.
    """
    S = np.zeros((net.n_complexes, net.n_reactions), dtype=np.int64)
    for j, r in enumerate(net.reactions):
        S[r.reactant, j] = -1
        S[r.product, j] = 1
    C = np.array([c.stoich for c in net.complexes], dtype=np.int64).T
    if C.size == 0:
        C = C.reshape(net.n_species, net.n_complexes)
    return StructuralMatrices(S=S, C=C, Gamma=C @ S)


def _falling_factorial(x: int, n: int) -> float:
    out = 1.0
    for k in range(n):
        out *= x - k
    return out


def intensity(net: ReactionNetwork, r: int, x) -> float:
    """Reaction intensity at integer state ``x``.

    Mass action uses falling factorials, so the rate is positive exactly
    when the state dominates the reactant complex component-wise.
    """
    rx = net.reactions[r]
    alpha = net.complexes[rx.reactant].stoich
    kin = rx.kinetics
    if isinstance(kin, SlackGated):
        gated = set(kin.slack_indices)
        for i, c in zip(kin.slack_indices, kin.coeffs):
            if x[i] < c:
                return 0.0
        out = rx.rate_constant
        for i, a in enumerate(alpha):
            if a and i not in gated:
                out *= _falling_factorial(x[i], a)
        return max(out, 0.0)
    out = rx.rate_constant
    for i, a in enumerate(alpha):
        if a:
            if x[i] < a:
                return 0.0
            out *= _falling_factorial(x[i], a)
    return out


def mass_action_rates(net: ReactionNetwork, r: int, states: np.ndarray) -> np.ndarray:
    """Vectorized mass-action intensity of reaction ``r`` over a state matrix.

    ``states`` is (n, d) of non-negative integers; SlackGated kinetics are
    handled by indicator columns.
    """
    rx = net.reactions[r]
    alpha = net.complexes[rx.reactant].stoich
    kin = rx.kinetics
    gated = set(kin.slack_indices) if isinstance(kin, SlackGated) else set()
    out = np.full(states.shape[0], rx.rate_constant, dtype=np.float64)
    for i, a in enumerate(alpha):
        if not a or i in gated:
            continue
        col = states[:, i]
        term = col.astype(np.float64)
        for k in range(1, a):
            term = term * (col - k)
        out *= np.maximum(term, 0.0)
    if gated:
        for i, c in zip(kin.slack_indices, kin.coeffs):
            out *= states[:, i] >= c
    return out


def _undirected_components(n: int, edges) -> list[list[int]]:
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        comps.append(sorted(comp))
    return comps


def _strong_components(n: int, edges) -> list[list[int]]:
    # Iterative Tarjan; deterministic order by smallest member.
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for i in range(pi, len(adj[v])):
                u = adj[v][i]
                if index[u] == -1:
                    work[-1] = (v, i + 1)
                    work.append((u, 0))
                    advanced = True
                    break
                if on_stack[u]:
                    low[v] = min(low[v], index[u])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    u = stack.pop()
                    on_stack[u] = False
                    comp.append(u)
                    if u == v:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    comps.sort(key=lambda c: c[0])
    return comps


def linkage_classes(net: ReactionNetwork) -> list[list[int]]:
    """Connected components of the undirected complex graph."""
    edges = [(r.reactant, r.product) for r in net.reactions]
    comps = _undirected_components(net.n_complexes, edges)
    comps.sort(key=lambda c: c[0])
    return comps


@dataclass(frozen=True)
class WeakReversibilityReport:
    is_weakly_reversible: bool
    linkage_classes: tuple[tuple[int, ...], ...]


def weak_reversibility(net: ReactionNetwork) -> WeakReversibilityReport:
    """Weak reversibility: every linkage class is strongly connected."""
    lc = linkage_classes(net)
    edges = [(r.reactant, r.product) for r in net.reactions]
    scc = _strong_components(net.n_complexes, edges)
    scc_sets = {frozenset(c) for c in scc}
    ok = all(frozenset(c) in scc_sets for c in lc)
    return WeakReversibilityReport(ok, tuple(tuple(c) for c in lc))


def integer_rank(M) -> int:
    """Rank of an integer matrix over the rationals (exact elimination)."""
    rows = [[Fraction(int(v)) for v in row] for row in np.asarray(M)]
    if not rows or not rows[0]:
        return 0
    rank = 0
    ncols = len(rows[0])
    pivot_row = 0
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
        for i in range(pivot_row + 1, len(rows)):
            if rows[i][col] != 0:
                f = rows[i][col] / pv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[pivot_row])]
        pivot_row += 1
        rank += 1
        if pivot_row == len(rows):
            break
    return rank


def deficiency(net: ReactionNetwork) -> int:
    """n_complexes - linkage classes - stoichiometric rank (exact)."""
    mats = build_matrices(net)
    n = net.n_complexes
    ell = len(linkage_classes(net))
    s = integer_rank(mats.Gamma)
    return n - ell - s

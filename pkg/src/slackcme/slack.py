"""Slack networks: conservation-bound truncation encoded in the network.

Given conservation rows W and bounds N, each complex is extended with
slack-species coefficients D = U - W C (U has constant rows), which makes
W x + y = N an exact conservation law of the extended network.  Slack
counts y = N - W x are never stored in the state; reactions whose
reactant needs more slack than is available are gated off.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import product as iter_product

import numpy as np

from .conservation import intrinsically_bounded
from .network import (
    Complex,
    NetworkError,
    Reaction,
    ReactionNetwork,
    SlackGated,
    build_matrices,
    mass_action_rates,
)
from .network import intensity as base_intensity

__all__ = [
    "SlackMode",
    "ConservationSpec",
    "SlackNetwork",
    "build_regular_slack",
    "build_optimized_slack",
    "slack_intensity",
    "slack_rates",
    "score_conservation_vector",
    "suggest_conservation_vector",
    "default_candidates",
]


class SlackMode(Enum):
    REGULAR = "regular"
    OPTIMIZED = "optimized"


@dataclass(frozen=True)
class ConservationSpec:
    """Rows of W are conservation vectors; N are the bounds; u the constant
    complex offsets (u_i must be at least the max of row i of W C)."""

    W: np.ndarray  # (m, d) integer
    N: np.ndarray  # (m,) positive integer
    u: np.ndarray  # (m,) positive integer

    def __post_init__(self):
        object.__setattr__(self, "W", np.atleast_2d(np.asarray(self.W, dtype=np.int64)))
        object.__setattr__(self, "N", np.atleast_1d(np.asarray(self.N, dtype=np.int64)))
        object.__setattr__(self, "u", np.atleast_1d(np.asarray(self.u, dtype=np.int64)))
        if self.W.shape[0] != self.N.shape[0] or self.W.shape[0] != self.u.shape[0]:
            raise NetworkError("W, N and u row counts disagree")
        if np.any(self.N <= 0):
            raise NetworkError("bounds N must be positive")

    @property
    def n_rows(self) -> int:
        return self.W.shape[0]


class SlackNetwork:
    """A base network plus slack stoichiometry D and gating coefficients.

    ``reactant_slack[r]`` / ``product_slack[r]`` are the slack coefficients
    of reaction r's complexes after optional per-reaction cancellation; the
    intensity gate uses the reactant side.
    """

    def __init__(self, base: ReactionNetwork, spec: ConservationSpec, D: np.ndarray,
                 mode: SlackMode, reactant_slack: np.ndarray, product_slack: np.ndarray):
        self.base = base
        self.spec = spec
        self.D = np.asarray(D, dtype=np.int64)
        self.mode = mode
        self.reactant_slack = np.asarray(reactant_slack, dtype=np.int64)  # (m, n_reactions)
        self.product_slack = np.asarray(product_slack, dtype=np.int64)
        self._gamma = build_matrices(base).Gamma

    @property
    def n_slack(self) -> int:
        return self.spec.n_rows

    def slack_counts(self, x) -> np.ndarray:
        """y = N - W x for one state or a (n, d) batch."""
        x = np.asarray(x, dtype=np.int64)
        if x.ndim == 1:
            return self.spec.N - self.spec.W @ x
        return self.spec.N[None, :] - x @ self.spec.W.T

    def contains(self, x) -> bool:
        return bool(np.all(self.slack_counts(x) >= 0))

    def slack_species_names(self) -> list[str]:
        taken = set(self.base.species_names())
        names = []
        for i in range(self.n_slack):
            cand = "Y" if self.n_slack == 1 else f"Y{i + 1}"
            while cand in taken:
                cand = "_" + cand
            taken.add(cand)
            names.append(cand)
        return names

    def to_network(self) -> ReactionNetwork:
        """Materialize with explicit slack species (for structural analysis).

        Reactions whose reactant carries slack get SlackGated kinetics so
        the gated intensity survives materialization.
        """
        d = self.base.n_species
        m = self.n_slack
        names = self.base.species_names() + self.slack_species_names()
        slack_idx = tuple(range(d, d + m))
        complexes: list[tuple[int, ...]] = []
        cindex: dict[tuple[int, ...], int] = {}

        def intern(vec):
            vec = tuple(int(v) for v in vec)
            if vec not in cindex:
                cindex[vec] = len(complexes)
                complexes.append(vec)
            return cindex[vec]

        reactions = []
        for r, rx in enumerate(self.base.reactions):
            lhs = tuple(self.base.complexes[rx.reactant].stoich) + tuple(self.reactant_slack[:, r])
            rhs = tuple(self.base.complexes[rx.product].stoich) + tuple(self.product_slack[:, r])
            coeffs = tuple(int(c) for c in self.reactant_slack[:, r])
            kin = SlackGated(slack_idx, coeffs) if any(coeffs) else rx.kinetics
            reactions.append(Reaction(intern(lhs), intern(rhs), rx.rate_constant, kin))
        return ReactionNetwork(names, [Complex(c) for c in complexes], reactions)

    def __repr__(self):
        return f"SlackNetwork({self.mode.value}, m={self.n_slack}, base={self.base!r})"


def _check_bounds_feasible(spec: ConservationSpec, x0) -> None:
    if x0 is None:
        return
    x0 = np.asarray(x0, dtype=np.int64)
    lhs = spec.W @ x0
    if np.any(lhs > spec.N):
        raise NetworkError(f"initial state violates the bound: W x0 = {lhs.tolist()}, N = {spec.N.tolist()}")


def build_regular_slack(net: ReactionNetwork, W, N, u=None, x0=None) -> SlackNetwork:
    """Extend every complex with D = U - W C, preserving connectivity.

    With u omitted, u_i is the max entry of row i of W C (the least
    intrusive choice); larger u is allowed but makes more boundary states
    inert.  Raises if any D entry would be negative or x0 violates N.
    """
    mats = build_matrices(net)
    W = np.atleast_2d(np.asarray(W, dtype=np.int64))
    if W.shape[1] != net.n_species:
        raise NetworkError("conservation vector length does not match species count")
    WC = W @ mats.C
    if u is None:
        u = WC.max(axis=1)
    u = np.atleast_1d(np.asarray(u, dtype=np.int64))
    D = u[:, None] - WC
    if np.any(D < 0):
        rows = np.flatnonzero((D < 0).any(axis=1))
        raise NetworkError(
            f"offset u too small for conservation row(s) {rows.tolist()}: "
            f"need at least {WC.max(axis=1).tolist()}"
        )
    spec = ConservationSpec(W, np.atleast_1d(np.asarray(N, dtype=np.int64)), u)
    _check_bounds_feasible(spec, x0)
    reactant_slack = np.empty((spec.n_rows, net.n_reactions), dtype=np.int64)
    product_slack = np.empty_like(reactant_slack)
    for r, rx in enumerate(net.reactions):
        reactant_slack[:, r] = D[:, rx.reactant]
        product_slack[:, r] = D[:, rx.product]
    return SlackNetwork(net, spec, D, SlackMode.REGULAR, reactant_slack, product_slack)


def build_optimized_slack(net: ReactionNetwork, W, N, x0=None) -> SlackNetwork:
    """Regular slack with minimal u, then per-reaction cancellation of
    slack species common to both sides.  May break linkage classes, but
    reactions that never consumed slack fire regardless of the boundary."""
    snet = build_regular_slack(net, W, N, u=None, x0=x0)
    common = np.minimum(snet.reactant_slack, snet.product_slack)
    return SlackNetwork(
        net,
        snet.spec,
        snet.D,
        SlackMode.OPTIMIZED,
        snet.reactant_slack - common,
        snet.product_slack - common,
    )


def slack_intensity(snet: SlackNetwork, r: int, x) -> float:
    """Base intensity times the indicator that each implicit slack count
    y_i = N_i - (W x)_i covers the reaction's reactant slack coefficient."""
    y = snet.slack_counts(x)
    if np.any(y < snet.reactant_slack[:, r]):
        return 0.0
    return base_intensity(snet.base, r, x)


def slack_rates(snet: SlackNetwork, r: int, states: np.ndarray) -> np.ndarray:
    """Vectorized slack_intensity over a (n, d) state matrix."""
    rates = mass_action_rates(snet.base, r, states)
    y = snet.slack_counts(states)
    gate = np.all(y >= snet.reactant_slack[:, r][None, :], axis=1)
    return rates * gate


def score_conservation_vector(net: ReactionNetwork, w) -> int:
    """Number of reactions gated off at the bound: (nu' - nu) . w > 0."""
    w = np.asarray(w, dtype=np.int64)
    gamma = build_matrices(net).Gamma
    return int(np.count_nonzero(w @ gamma > 0))


def default_candidates(net: ReactionNetwork, max_coeff: int = 2) -> list[np.ndarray]:
    """All w in {0..max_coeff}^d with positive weight on every species that
    no intrinsic conservation law bounds.  Capped at d <= 8."""
    d = net.n_species
    if d > 8:
        raise NetworkError("default candidate enumeration supports at most 8 species")
    bounded = intrinsically_bounded(net)
    ranges = [range(1, max_coeff + 1) if not bounded[i] else range(0, max_coeff + 1)
              for i in range(d)]
    out = []
    for combo in iter_product(*ranges):
        if any(combo):
            out.append(np.array(combo, dtype=np.int64))
    return out


def suggest_conservation_vector(net: ReactionNetwork, candidates=None) -> np.ndarray:
    """Candidate with the fewest gated-off reactions; ties break by l1 norm
    then lexicographic order."""
    if candidates is None:
        candidates = default_candidates(net)
    candidates = [np.asarray(c, dtype=np.int64) for c in candidates]
    if not candidates:
        raise NetworkError("empty candidate list")
    bounded = intrinsically_bounded(net)
    for w in candidates:
        if w.shape != (net.n_species,):
            raise NetworkError("candidate length does not match species count")
        if np.any(w < 0) or not np.any(w):
            raise NetworkError("candidates must be non-negative and non-zero")
        if np.any((w == 0) & ~bounded):
            missing = [net.species[i].name for i in np.flatnonzero((w == 0) & ~bounded)]
            raise NetworkError(f"candidate {w.tolist()} leaves unbounded species uncovered: {missing}")
    ranked = sorted(candidates, key=lambda w: (score_conservation_vector(net, w),
                                               int(np.sum(w)), tuple(w.tolist())))
    return ranked[0]

"""Structural certificates: complex balance, product-form stationary
distributions, and exponential Lyapunov drift.

The Lyapunov route uses V(x) = exp(w . x) for a non-negative weight
vector aligned with the truncation, expands the generator drift as
V(x) Q(x) with Q polynomial, and certifies when the leading coefficient
of Q in every weighted species direction is strictly negative.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iter_product
from math import exp, expm1, inf, log

import numpy as np
from scipy.special import gammaln

from .conservation import nonnegative_laws
from .network import ReactionNetwork, build_matrices
from .slack import SlackNetwork
from .solver import Distribution
from .statespace import StateSpace, enumerate_states

__all__ = [
    "ComplexBalanceCertificate",
    "NewtonNonConvergence",
    "find_complex_balance",
    "complex_balance_residual",
    "product_form_stationary",
    "LyapunovCertificate",
    "Inconclusive",
    "lyapunov_certificate",
]

_SIGN_MARGIN = 1e-12


class NewtonNonConvergence(RuntimeError):
    """The steady-state solve failed although a solution is guaranteed."""


@dataclass(frozen=True)
class ComplexBalanceCertificate:
    c_star: np.ndarray  # positive steady-state concentrations
    residual: float  # max per-complex inflow/outflow mismatch at c_star

    def to_json_dict(self) -> dict:
        return {"c_star": self.c_star.tolist(), "residual": self.residual}


def _deterministic_fluxes(net: ReactionNetwork, c: np.ndarray) -> np.ndarray:
    """Mass-action reaction fluxes kappa_r * prod c^alpha (plain powers)."""
    out = np.empty(net.n_reactions)
    for r, rx in enumerate(net.reactions):
        alpha = net.complexes[rx.reactant].stoich
        v = rx.rate_constant
        for i, a in enumerate(alpha):
            if a:
                v *= c[i] ** a
        out[r] = v
    return out


def complex_balance_residual(net: ReactionNetwork, c) -> float:
    """Max over complexes of |inflow - outflow| at concentrations c.

    Kinetics tags are ignored: this is the deterministic mass-action model
    of the network structure.
    """
    c = np.asarray(c, dtype=np.float64)
    v = _deterministic_fluxes(net, c)
    balance = np.zeros(net.n_complexes)
    for r, rx in enumerate(net.reactions):
        balance[rx.reactant] -= v[r]
        balance[rx.product] += v[r]
    return float(np.abs(balance).max())


def find_complex_balance(net: ReactionNetwork, c0=None, residual_tol: float = 1e-9,
                         max_iter: int = 200):
    """Search for a complex-balanced steady state of the mass-action ODE.

    Damped Newton on the right-hand side restricted to the stoichiometric
    compatibility class of c0 (default: all ones).  Returns a certificate
    when the per-complex balance residual at the found steady state is
    below ``residual_tol``; returns None when the steady state exists but
    is not complex balanced, or when no positive steady state is found.
    For deficiency-zero weakly reversible networks a balanced steady state
    is guaranteed, so a failed solve raises NewtonNonConvergence there.
    """
    from .network import deficiency, weak_reversibility

    gamma = build_matrices(net).Gamma.astype(np.float64)
    guaranteed = deficiency(net) == 0 and weak_reversibility(net).is_weakly_reversible

    U, s, _ = np.linalg.svd(gamma, full_matrices=False)
    rank = int((s > 1e-12 * max(s.max(), 1.0)).sum())
    P = U[:, :rank]

    c0 = np.ones(net.n_species) if c0 is None else np.asarray(c0, dtype=np.float64)
    c = c0.copy()

    def rhs(cv):
        return gamma @ _deterministic_fluxes(net, cv)

    converged = False
    for _ in range(max_iter):
        f = rhs(c)
        scale = max(1.0, float(np.abs(_deterministic_fluxes(net, c)).max()))
        if np.abs(f).max() <= 1e-13 * scale:
            converged = True
            break
        v = _deterministic_fluxes(net, c)
        dv = np.zeros((net.n_reactions, net.n_species))
        for r, rx in enumerate(net.reactions):
            alpha = net.complexes[rx.reactant].stoich
            for i, a in enumerate(alpha):
                if a:
                    dv[r, i] = v[r] * a / c[i]
        J = P.T @ gamma @ dv @ P
        g = P.T @ f
        try:
            step = np.linalg.solve(J, -g)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        improved = False
        fn = np.abs(f).max()
        while lam > 1e-12:
            cand = c + lam * (P @ step)
            if np.all(cand > 0) and np.abs(rhs(cand)).max() < fn:
                c = cand
                improved = True
                break
            lam *= 0.5
        if not improved:
            break

    if not converged:
        f = rhs(c)
        scale = max(1.0, float(np.abs(_deterministic_fluxes(net, c)).max()))
        converged = np.abs(f).max() <= 1e-10 * scale
    if not converged:
        if guaranteed:
            raise NewtonNonConvergence(
                "steady state guaranteed (deficiency zero, weakly reversible) "
                "but Newton did not converge"
            )
        return None
    res = complex_balance_residual(net, c)
    if res < residual_tol:
        return ComplexBalanceCertificate(c_star=c, residual=res)
    return None


def product_form_stationary(snet: SlackNetwork, c_star, space: StateSpace | None = None,
                            x0=None) -> Distribution:
    """Truncated-renormalized Poisson product over the slack state space.

    Requires the base network to be complex balanced at ``c_star``; the
    slack system then inherits the stationary distribution up to the
    normalization constant on the truncated space.
    """
    if space is None:
        space = enumerate_states(snet, x0=x0)
    c = np.asarray(c_star, dtype=np.float64)
    if np.any(c <= 0):
        raise ValueError("c_star must be positive")
    states = space.states.astype(np.float64)
    logw = states @ np.log(c) - gammaln(states + 1.0).sum(axis=1)
    logw -= logw.max()
    w = np.exp(logw)
    return Distribution(space, w / w.sum())


@dataclass(frozen=True)
class Inconclusive:
    reason: str

    def __bool__(self):
        return False


@dataclass(frozen=True)
class LyapunovCertificate:
    """Drift certificate: sum_r lambda_r(x) (V(x + d_r) - V(x)) <= -C V(x) + D
    for V = exp(w . x), verified for all states (outside the box analytically
    via the negative leading coefficients, inside it exhaustively).

    D can overflow a float for stiff systems; log_D is always finite.
    """

    w: np.ndarray
    C: float
    D: float
    log_D: float
    boundary_M: int
    leading: dict  # species name -> worst-case leading coefficient

    def to_json_dict(self) -> dict:
        return {
            "w": self.w.tolist(),
            "C": self.C,
            "D": self.D,
            "log_D": self.log_D,
            "M": self.boundary_M,
        }


def _drift_polynomial(net: ReactionNetwork, w: np.ndarray):
    """Q(x) with drift = V(x) Q(x): monomial exponent tuple -> coefficient."""
    gamma = build_matrices(net).Gamma
    poly: dict[tuple, float] = {}
    for r, rx in enumerate(net.reactions):
        jump = float(w @ gamma[:, r])
        g = expm1(jump)
        if g == 0.0:
            continue
        # Expand kappa * prod x_i^(a_i) into monomials: multiply step by
        # step with the falling-factorial factor (x_i - step).
        terms = {(): rx.rate_constant * g}
        alpha = net.complexes[rx.reactant].stoich
        for i, a in enumerate(alpha):
            for step in range(a):
                new: dict[tuple, float] = {}
                for mono, coeff in terms.items():
                    e = dict(zip(*mono)) if mono else {}
                    up = dict(e)
                    up[i] = up.get(i, 0) + 1
                    key_up = tuple(zip(*sorted(up.items())))
                    new[key_up] = new.get(key_up, 0.0) + coeff
                    if step:
                        key_dn = tuple(zip(*sorted(e.items()))) if e else ()
                        new[key_dn] = new.get(key_dn, 0.0) - coeff * step
                terms = new
        for mono, coeff in terms.items():
            poly[mono] = poly.get(mono, 0.0) + coeff
    scale = max((abs(v) for v in poly.values()), default=1.0)
    return {m: c for m, c in poly.items() if abs(c) > 1e-15 * scale}


def _mono_exponents(mono, d):
    e = np.zeros(d, dtype=np.int64)
    if mono:
        idx, exps = mono
        for i, a in zip(idx, exps):
            e[i] = a
    return e


def lyapunov_certificate(net: ReactionNetwork, w, x0=None, box_cap: int = 20000,
                         u_grid_cap: int = 4096):
    """Exponential drift certificate for V(x) = exp(w . x), w >= 0.

    Zero-weight species that appear in the drift polynomial must be bounded
    by intrinsic conservation laws, whose levels are pinned by ``x0``
    (e.g. single-copy gene states).  Returns a LyapunovCertificate or an
    Inconclusive with the offending coefficient named.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (net.n_species,):
        raise ValueError("weight vector length does not match species count")
    if np.any(w < 0):
        raise ValueError("weight vector must be non-negative (V must be monotone "
                         "across truncation shells)")
    for rx in net.reactions:
        if sum(net.complexes[rx.reactant].stoich) > 2:
            return Inconclusive("intensity of polynomial degree > 2 (policy limit)")

    d = net.n_species
    names = net.species_names()
    poly = _drift_polynomial(net, w)
    if not poly:
        return Inconclusive("drift polynomial vanishes identically; no decay direction")

    growth = np.flatnonzero(w > 0)
    if not growth.size:
        return Inconclusive("weight vector is zero; V is constant")
    growth_set = set(int(i) for i in growth)
    appearing = np.zeros(d, dtype=bool)
    for mono in poly:
        appearing |= _mono_exponents(mono, d) > 0
    bounded_vars = [i for i in range(d) if appearing[i] and i not in growth_set]

    # Upper bounds for zero-weight variables, from conservation laws at x0.
    ubounds = {}
    if bounded_vars:
        if x0 is None:
            return Inconclusive(
                "zero-weight species "
                f"{[names[i] for i in bounded_vars]} appear in the drift; pass x0 "
                "to pin their conservation levels"
            )
        x0 = np.asarray(x0, dtype=np.int64)
        laws = nonnegative_laws(net)
        for i in bounded_vars:
            best = None
            for law in laws:
                if law[i] > 0 and all(w[j] == 0 for j in np.flatnonzero(law)):
                    level = int(law @ x0) // int(law[i])
                    best = level if best is None else min(best, level)
            if best is None:
                return Inconclusive(
                    f"species {names[i]} has zero weight and no intrinsic bound"
                )
            ubounds[i] = best
    grid_size = 1
    for i in bounded_vars:
        grid_size *= ubounds[i] + 1
    if grid_size > u_grid_cap:
        return Inconclusive("bounded-variable grid too large to scan")
    u_combos = list(iter_product(*(range(ubounds[i] + 1) for i in bounded_vars)))

    # Split the polynomial by growth-variable pattern.
    const_terms = []  # (coeff, {bounded var: exp})
    lin_terms = {int(i): [] for i in growth}  # x_i * (coeff, bounded part)
    quad = {int(i): 0.0 for i in growth}  # x_i^2
    cross: dict[tuple, float] = {}  # x_i x_j, i < j
    for mono, coeff in poly.items():
        e = _mono_exponents(mono, d)
        ge = [(int(i), int(e[i])) for i in growth if e[i]]
        be = {int(i): int(e[i]) for i in bounded_vars if e[i]}
        gdeg = sum(a for _, a in ge)
        if gdeg == 0:
            const_terms.append((coeff, be))
        elif gdeg == 1:
            lin_terms[ge[0][0]].append((coeff, be))
        elif gdeg == 2 and len(ge) == 1:
            quad[ge[0][0]] += coeff
        elif gdeg == 2 and len(ge) == 2:
            key = (min(ge[0][0], ge[1][0]), max(ge[0][0], ge[1][0]))
            cross[key] = cross.get(key, 0.0) + coeff
        else:
            return Inconclusive("drift polynomial exceeds quadratic growth degree")

    def eval_bounded(terms, combo):
        total = 0.0
        for coeff, be in terms:
            v = coeff
            for i, a in be.items():
                v *= combo[bounded_vars.index(i)] ** a
            total += v
        return total

    tol = _SIGN_MARGIN * max(abs(v) for v in poly.values())
    for (i, j), cval in cross.items():
        if cval > tol:
            return Inconclusive(
                f"cross coefficient of {names[i]}*{names[j]} is {cval:.6g} > 0"
            )

    qb_max = max(eval_bounded(const_terms, combo) for combo in u_combos)
    c1_worst = {}
    for i in growth:
        i = int(i)
        vals = [eval_bounded(lin_terms[i], combo) for combo in u_combos]
        c1_worst[i] = max(vals)
    leading = {}
    for i in growth:
        i = int(i)
        c2 = quad[i]
        if c2 < -tol:
            leading[names[i]] = c2
        elif abs(c2) <= tol:
            if not (c1_worst[i] < -tol):
                bad = c1_worst[i] if lin_terms[i] else qb_max
                return Inconclusive(
                    f"leading coefficient {bad:.6g} for species {names[i]} is not negative"
                )
            leading[names[i]] = c1_worst[i]
        else:
            return Inconclusive(
                f"quadratic coefficient {c2:.6g} of {names[i]}^2 is positive"
            )

    # Box size: beyond M, every direction's decay dominates the positive part
    # (10% margin); then C = guaranteed decay at the box edge.
    def f_dir(i, s):
        return quad[i] * s * s + c1_worst[i] * s

    humps = {}
    sstars = {}
    for i in growth:
        i = int(i)
        if quad[i] < -tol and c1_worst[i] > 0:
            sstars[i] = c1_worst[i] / (-2.0 * quad[i])
            humps[i] = max(0.0, f_dir(i, sstars[i]))
        else:
            sstars[i] = 0.0
            humps[i] = 0.0
    H = qb_max + sum(humps.values())

    M = 8
    C = None
    while M <= box_cap:
        if M >= max(sstars.values(), default=0.0):
            worst = max(f_dir(int(i), M) + (H - humps[int(i)]) for i in growth)
            cand = -worst
            need = 0.1 * H if H > 0 else 1e-9
            if cand >= need:
                C = cand
                break
        M *= 2
    if C is None:
        return Inconclusive(
            f"no box up to M = {box_cap} dominates the positive drift terms"
        )

    log_D = _box_log_max(growth, bounded_vars, u_combos, const_terms, lin_terms,
                         quad, cross, w, C, M)
    if log_D == -inf:
        log_D = 0.0  # Q + C <= 0 everywhere in the box; any positive D works
    try:
        D = exp(log_D)
    except OverflowError:
        D = inf
    return LyapunovCertificate(
        w=w, C=float(C), D=D, log_D=float(log_D), boundary_M=int(M), leading=leading
    )


def _box_log_max(growth, bounded_vars, u_combos, const_terms, lin_terms, quad,
                 cross, w, C, M):
    """Exact max of log(V(x) * (Q(x) + C)) over the integer box [0, M]^growth
    and the bounded-variable grid, restricted to Q + C > 0.

    For one or two growth dimensions the inner dimension is reduced by
    exact concave integer maximization, which makes the scan equivalent to
    full enumeration at any M.
    """
    growth = [int(i) for i in growth]

    def lin_eval(i, combo):
        total = 0.0
        for coeff, be in lin_terms[i]:
            v = coeff
            for k, a in be.items():
                v *= combo[bounded_vars.index(k)] ** a
            total += v
        return total

    def const_eval(combo):
        total = 0.0
        for coeff, be in const_terms:
            v = coeff
            for k, a in be.items():
                v *= combo[bounded_vars.index(k)] ** a
            total += v
        return total

    best = -inf
    if len(growth) == 0:
        for combo in u_combos:
            q = const_eval(combo) + C
            if q > 0:
                best = max(best, log(q))
        return best

    if len(growth) == 1:
        i = growth[0]
        xs = np.arange(M + 1, dtype=np.float64)
        for combo in u_combos:
            qv = const_eval(combo) + C + lin_eval(i, combo) * xs + quad[i] * xs * xs
            ok = qv > 0
            if ok.any():
                vals = w[i] * xs[ok] + np.log(qv[ok])
                best = max(best, float(vals.max()))
        return best

    if len(growth) != 2:
        raise NotImplementedError("certificate box scan supports at most 2 weighted species")

    i, j = growth
    cij = cross.get((min(i, j), max(i, j)), 0.0)
    xs = np.arange(M + 1, dtype=np.float64)
    for combo in u_combos:
        g0 = const_eval(combo) + C
        ai, aj = lin_eval(i, combo), lin_eval(j, combo)
        # Q + C = b0(x_i) + b1(x_i) z + b2 z^2 in the inner variable z = x_j.
        b0 = g0 + ai * xs + quad[i] * xs * xs
        b1 = aj + cij * xs
        b2 = quad[j]
        # phi(z) = w_j z + log(b0 + b1 z + b2 z^2) is concave where positive;
        # candidates: z = 0, M, and the integer neighbors of the stationary
        # point of phi (root of w_j (b0 + b1 z + b2 z^2) + b1 + 2 b2 z = 0).
        cand_list = [np.zeros_like(xs), np.full_like(xs, M)]
        wa = w[j] * b2
        wb = w[j] * b1 + 2.0 * b2
        wc = w[j] * b0 + b1
        with np.errstate(invalid="ignore", divide="ignore"):
            if abs(wa) > 0:
                disc = wb * wb - 4.0 * wa * wc
                sq = np.sqrt(np.maximum(disc, 0.0))
                for root in ((-wb + sq) / (2 * wa), (-wb - sq) / (2 * wa)):
                    cand_list.append(np.floor(root))
                    cand_list.append(np.ceil(root))
            else:
                root = np.where(np.abs(wb) > 0, -wc / np.where(wb == 0, 1.0, wb), 0.0)
                cand_list.append(np.floor(root))
                cand_list.append(np.ceil(root))
        for zs in cand_list:
            zc = np.clip(np.nan_to_num(zs, nan=0.0, posinf=M, neginf=0.0), 0, M)
            qv = b0 + b1 * zc + b2 * zc * zc
            ok = qv > 0
            if ok.any():
                vals = w[i] * xs[ok] + w[j] * zc[ok] + np.log(qv[ok])
                best = max(best, float(vals.max()))
    return best

import numpy as np
import pytest

import slackcme as sc
from slackcme.models import birth_death, simple_exchange


def bd_generator(N=6):
    snet = sc.build_regular_slack(birth_death.network(), [[1]], [N])
    space = sc.enumerate_states(snet)
    return sc.build_generator(space, snet), space, snet


def exchange_generator(N):
    snet = sc.build_regular_slack(simple_exchange.network(), [[1]], [N])
    space = sc.enumerate_states(snet)
    return sc.build_generator(space, snet), space


def truncated_poisson(mean, N):
    k = np.arange(N + 1, dtype=float)
    w = np.exp(k * np.log(mean) - [float(np.sum(np.log(np.arange(1, i + 1)))) for i in range(N + 1)])
    return w / w.sum()


def test_stationary_truncated_poisson():
    gen, space = exchange_generator(2)
    pi = sc.stationary(gen)
    assert np.allclose(pi.p, [0.2, 0.4, 0.4], atol=1e-12)
    for N in (5, 10, 50):
        gen, space = exchange_generator(N)
        pi = sc.stationary(gen)
        assert np.abs(pi.p - truncated_poisson(2.0, N)).max() < 1e-10


def test_stationary_symmetric_two_state():
    net = sc.parse_network("A -> B @ 1\nB -> A @ 1")
    snet = sc.build_regular_slack(net, [[1, 1]], [1])
    space = sc.enumerate_states(snet)
    gen = sc.build_generator(space, snet)
    closed = [c for c in sc.communication_classes(gen, root=(1, 0)) if c.closed]
    pi = sc.stationary(gen, members=closed[0])
    assert pi.prob((1, 0)) == pytest.approx(0.5)
    assert pi.prob((0, 1)) == pytest.approx(0.5)


def test_stationary_residual_reported():
    gen, _ = exchange_generator(12)
    pi = sc.stationary(gen)
    norm = float(np.abs(gen.matrix).sum(axis=1).max())
    assert pi.residual is not None
    assert pi.residual < 1e-10 * norm


def test_stationary_requires_unique_closed_class():
    # two disconnected conservative pairs -> two closed classes
    net = sc.parse_network("A -> B @ 1\nB -> A @ 1")
    snet = sc.build_regular_slack(net, [[1, 1]], [1])
    space = sc.enumerate_states(snet)
    gen = sc.build_generator(space, snet)
    # (0,0) is inert (absorbing) and the A/B pair is closed: two closed classes
    with pytest.raises(sc.SolverError, match="closed"):
        sc.stationary(gen)


def test_transient_identity_and_closed_form():
    net = sc.parse_network("A -> B @ 1\nB -> A @ 1")
    snet = sc.build_regular_slack(net, [[1, 1]], [1])
    space = sc.enumerate_states(snet)
    gen = sc.build_generator(space, snet)
    p0 = sc.point_mass(space, (1, 0))
    assert np.array_equal(sc.transient(gen, p0, 0.0).p, p0.p)
    for t in (0.1, 0.7, 2.0, 10.0):
        pt = sc.transient(gen, p0, t)
        assert pt.prob((1, 0)) == pytest.approx(0.5 * (1 + np.exp(-2 * t)), abs=1e-12)
        assert pt.p.sum() == pytest.approx(1.0, abs=1e-10)


def test_transient_zero_generator():
    net = sc.parse_network("2X -> X2 @ 1\nX2 -> 2X @ 1")
    snet = sc.build_regular_slack(net, [[1, 2]], [1])
    space = sc.enumerate_states(snet)  # x in {0,1} only; no reaction can fire
    gen = sc.build_generator(space, snet)
    assert gen.matrix.nnz == 0
    p0 = sc.point_mass(space, (1, 0))
    assert np.array_equal(sc.transient(gen, p0, 3.5).p, p0.p)


def test_transient_large_rate_mass_conserved():
    gen, space = exchange_generator(30)
    scaled = sc.Generator(matrix=gen.matrix * 1e4, space=space)
    p0 = sc.point_mass(space, (0,))
    pt = sc.transient(scaled, p0, 1.0)  # uniformization rate ~ 6e5 steps
    assert pt.p.sum() == pytest.approx(1.0, abs=1e-10)
    pi = sc.stationary(gen)
    assert np.abs(pt.p - pi.p).max() < 1e-9


def test_transient_rejects_negative_time():
    gen, space = exchange_generator(3)
    with pytest.raises(ValueError):
        sc.transient(gen, sc.point_mass(space, (0,)), -0.5)


def test_mfpt_single_exit():
    net = sc.parse_network("X -> 0 @ 2")
    snet = sc.build_regular_slack(net, [[1]], [1])
    space = sc.enumerate_states(snet)
    gen = sc.build_generator(space, snet)
    res = sc.mfpt(gen, [(0,)], (1,))
    assert res.mean == pytest.approx(0.5, rel=1e-12)


def test_mfpt_pure_death_chain():
    net = sc.parse_network("X -> 0 @ 1")
    snet = sc.build_regular_slack(net, [[1]], [2])
    space = sc.enumerate_states(snet)
    gen = sc.build_generator(space, snet)
    res = sc.mfpt(gen, [(0,)], (2,))
    assert res.mean == pytest.approx(1.5, rel=1e-12)


def test_mfpt_trivial_and_errors():
    gen, space, snet = bd_generator(6)
    assert sc.mfpt(gen, [(0,)], (0,)).mean == 0.0
    # target outside the space is an error distinct from unreachable
    with pytest.raises(sc.NetworkError, match="disjoint"):
        sc.mfpt(gen, [(99,)], (0,))
    # unreachable target: pure death cannot climb
    net = sc.parse_network("X -> 0 @ 1")
    s2 = sc.build_regular_slack(net, [[1]], [3])
    sp2 = sc.enumerate_states(s2)
    g2 = sc.build_generator(sp2, s2)
    with pytest.raises(sc.NonAccessibleTarget):
        sc.mfpt(g2, [(3,)], (1,))


def test_mfpt_invariant_under_reordering():
    gen, space, snet = bd_generator(6)
    ref = sc.mfpt(gen, [(2,)], (0,)).mean
    perm = np.array([3, 0, 6, 1, 5, 2, 4])
    states = space.states[perm]
    reordered_space = sc.StateSpace(states, W=space.W, N=space.N)
    mat = gen.matrix[perm][:, perm]
    reordered = sc.Generator(matrix=mat.tocsr(), space=reordered_space)
    assert sc.mfpt(reordered, [(2,)], (0,)).mean == pytest.approx(ref, rel=1e-10)


def test_survival_exponential():
    net = sc.parse_network("X -> 0 @ 2")
    snet = sc.build_regular_slack(net, [[1]], [1])
    space = sc.enumerate_states(snet)
    gen = sc.build_generator(space, snet)
    ts = np.linspace(0.05, 3.0, 40)
    res = sc.survival(gen, [(0,)], (1,), ts)
    assert np.allclose(res.survival[1], np.exp(-2 * ts), atol=1e-10)


def test_survival_monotone_starts_at_one():
    gen, space, snet = bd_generator(6)
    ts = np.linspace(0.1, 20.0, 60)
    res = sc.survival(gen, [(4,)], (0,), ts)
    vals = res.survival[1]
    assert np.all(np.diff(vals) <= 1e-12)
    short = sc.survival(gen, [(4,)], (0,), np.array([1e-9]))
    assert short.survival[1][0] == pytest.approx(1.0, abs=1e-6)


def test_survival_integrates_to_mean():
    gen, space, snet = bd_generator(6)
    mean = sc.mfpt(gen, [(3,)], (0,)).mean
    ts = np.linspace(mean / 400, 15 * mean, 6000)
    res = sc.survival(gen, [(3,)], (0,), ts)
    assert res.mean == pytest.approx(mean, rel=0.01)


def test_l1_distance():
    gen, space = exchange_generator(6)
    pi = sc.stationary(gen)
    assert sc.l1_distance(pi, pi) == 0.0
    a = sc.point_mass(space, (0,))
    b = sc.point_mass(space, (3,))
    assert sc.l1_distance(a, b) == pytest.approx(2.0)
    # prefix embedding across truncation sizes
    gen5, space5 = exchange_generator(5)
    gen9, space9 = exchange_generator(9)
    pi5, pi9 = sc.stationary(gen5), sc.stationary(gen9)
    d = sc.l1_distance(pi5, pi9)
    assert 0 < d < 0.05
    mism = sc.StateSpace(np.array([[9], [7]]))
    with pytest.raises(sc.NetworkError, match="prefix"):
        sc.l1_distance(sc.Distribution(mism, np.array([0.5, 0.5])), pi9)


def test_product_form_matches_direct_solve():
    cert = sc.find_complex_balance(simple_exchange.network())
    for N in (2, 7, 20):
        snet = sc.build_regular_slack(simple_exchange.network(), [[1]], [N])
        space = sc.enumerate_states(snet)
        gen = sc.build_generator(space, snet)
        pf = sc.product_form_stationary(snet, cert.c_star, space)
        pi = sc.stationary(gen)
        assert np.abs(pf.p - pi.p).max() < 1e-9


def test_product_form_converges_monotonically():
    cert = sc.find_complex_balance(simple_exchange.network())
    poisson_full = None
    dists = []
    for N in (2, 4, 8, 16, 32):
        snet = sc.build_regular_slack(simple_exchange.network(), [[1]], [N])
        space = sc.enumerate_states(snet)
        pf = sc.product_form_stationary(snet, cert.c_star, space)
        from scipy.stats import poisson

        tail = 1.0 - poisson.cdf(N, 2.0)
        full = poisson.pmf(np.arange(N + 1), 2.0)
        dists.append(np.abs(pf.p - full).sum() + tail)
    assert all(b < a for a, b in zip(dists, dists[1:]))
    assert dists[-1] < 1e-10


def test_product_form_single_state():
    cert = sc.find_complex_balance(simple_exchange.network())
    snet = sc.build_regular_slack(simple_exchange.network(), [[1]], [1])
    space = sc.StateSpace(np.array([[0]]), W=[[1]], N=[0])
    pf = sc.product_form_stationary(snet, cert.c_star, space)
    assert pf.p.tolist() == [1.0]

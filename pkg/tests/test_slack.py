import numpy as np
import pytest

import slackcme as sc
from slackcme.models import dimerization, lotka_volterra, three_node_cycle
from slackcme.slack import slack_rates


def fmt_reactions(snet):
    mat = snet.to_network()
    return {
        f"{mat.format_complex(r.reactant)} -> {mat.format_complex(r.product)}"
        for r in mat.reactions
    }


def test_regular_slack_cycle_u1_u2():
    net = three_node_cycle.network()
    s1 = sc.build_regular_slack(net, [[1, 1]], [10], u=[1])
    assert s1.D.tolist() == [[1, 0, 0]]
    assert fmt_reactions(s1) == {"Y -> A", "A -> Y", "A -> B", "B -> A", "Y -> B"}
    s2 = sc.build_regular_slack(net, [[1, 1]], [10], u=[2])
    assert s2.D.tolist() == [[2, 1, 1]]
    assert fmt_reactions(s2) == {
        "2Y -> A + Y", "A + Y -> 2Y", "A + Y -> B + Y", "B + Y -> A + Y", "2Y -> B + Y",
    }


def test_regular_slack_birth_death():
    snet = sc.build_regular_slack(sc.parse_network("0 <-> X @ 1, 2"), [[1]], [5])
    assert snet.D.tolist() == [[1, 0]]
    assert fmt_reactions(snet) == {"Y -> X", "X -> Y"}


def test_default_u_is_rowmax_of_wc():
    net = three_node_cycle.network()
    snet = sc.build_regular_slack(net, [[2, 1]], [20])
    assert snet.spec.u.tolist() == [2]
    assert snet.D.tolist() == [[2, 0, 1]]


def test_u_too_small_rejected():
    net = three_node_cycle.network()
    with pytest.raises(sc.NetworkError, match="too small"):
        sc.build_regular_slack(net, [[2, 1]], [20], u=[1])


def test_infeasible_x0_rejected():
    net = three_node_cycle.network()
    with pytest.raises(sc.NetworkError, match="violates"):
        sc.build_regular_slack(net, [[1, 1]], [4], x0=(3, 3))


def test_optimized_cancellation():
    net = sc.parse_network("0 <-> A @ 1, 1\nA -> 2A @ 1")
    reg = sc.build_optimized_slack(net, [[1]], [5])
    assert fmt_reactions(reg) == {"Y -> A", "A -> Y", "A + Y -> 2A"}
    # no slack species on both sides of any reaction after cancellation
    assert np.all(np.minimum(reg.reactant_slack, reg.product_slack) == 0)


def test_optimized_lotka_volterra():
    snet = sc.build_optimized_slack(lotka_volterra.network(), [[1, 1]], [10])
    assert fmt_reactions(snet) == {
        "Y -> A", "A -> Y", "A + Y -> 2A",
        "B -> Y", "Y -> B", "A + B -> 2B",
    }


def test_no_slack_reaction_unchanged():
    net = dimerization.network()
    reg = sc.build_regular_slack(net, [[1, 2]], [20])
    opt = sc.build_optimized_slack(net, [[1, 2]], [20])
    # dimerization/undimerization conserve the bound: no slack on either side
    for r in (2, 3):
        assert reg.reactant_slack[0, r] == reg.product_slack[0, r] == 0
        assert opt.reactant_slack[0, r] == opt.product_slack[0, r] == 0


def test_slack_intensity_gating():
    snet = sc.build_regular_slack(sc.parse_network("0 <-> X @ 1, 2"), [[1]], [4])
    # birth is gated by y >= 1, death never gated
    assert sc.slack_intensity(snet, 0, (4,)) == 0.0
    assert sc.slack_intensity(snet, 0, (3,)) == 1.0
    assert sc.slack_intensity(snet, 1, (3,)) == 6.0


def test_slack_intensity_matches_base_when_slack_abundant():
    # Lemma-style check: y_i >= max reactant coefficient -> identical rates.
    net = three_node_cycle.network()
    snet = sc.build_regular_slack(net, [[2, 1]], [30])
    cmax = int(snet.reactant_slack.max())
    rng = np.random.default_rng(3)
    for _ in range(200):
        x = rng.integers(0, 8, size=2)
        y = snet.slack_counts(x)
        for r in range(net.n_reactions):
            lam = sc.slack_intensity(snet, r, x)
            base = sc.intensity(net, r, x)
            if np.all(y >= cmax):
                assert lam == base
            assert lam in (0.0, base)


def test_conservation_along_reactions():
    # W x + y is invariant under every reaction of the slack system.
    for model, W in ((three_node_cycle, [[2, 1]]), (lotka_volterra, [[1, 1]])):
        net = model.network()
        for build in (sc.build_regular_slack, sc.build_optimized_slack):
            snet = build(net, W, [12])
            gamma = sc.build_matrices(net).Gamma
            for r in range(net.n_reactions):
                dy = snet.product_slack[:, r] - snet.reactant_slack[:, r]
                assert np.all(snet.spec.W @ gamma[:, r] + dy == 0)


def test_regular_identity_wi_cd_s_zero():
    for model, W in ((three_node_cycle, [[2, 1]]), (lotka_volterra, [[1, 1]]),
                     (dimerization, [[1, 2]])):
        net = model.network()
        snet = sc.build_regular_slack(net, W, [9])
        mats = sc.build_matrices(net)
        WI = np.hstack([snet.spec.W, np.eye(snet.n_slack, dtype=np.int64)])
        CD = np.vstack([mats.C, snet.D])
        assert np.all(WI @ CD @ mats.S == 0)


def test_gating_never_goes_negative():
    snet = sc.build_optimized_slack(lotka_volterra.network(), [[1, 1]], [6])
    space = sc.enumerate_states(snet)
    gamma = sc.build_matrices(snet.base).Gamma
    for x in space.states:
        for r in range(snet.base.n_reactions):
            if sc.slack_intensity(snet, r, x) > 0:
                assert snet.contains(x + gamma[:, r])


def test_vectorized_rates_match_scalar():
    snet = sc.build_optimized_slack(lotka_volterra.network(), [[1, 1]], [8])
    space = sc.enumerate_states(snet)
    for r in range(snet.base.n_reactions):
        vec = slack_rates(snet, r, space.states)
        ref = [sc.slack_intensity(snet, r, x) for x in space.states]
        assert np.allclose(vec, ref)


def test_score_conservation_vector():
    bd = sc.parse_network("0 <-> X @ 1, 2")
    assert sc.score_conservation_vector(bd, [1]) == 1
    assert sc.score_conservation_vector(bd, [0]) == 0
    lv = lotka_volterra.network()
    assert sc.score_conservation_vector(lv, [1, 1]) == 3


def test_suggest_conservation_vector():
    bd = sc.parse_network("0 <-> X @ 1, 2")
    assert sc.suggest_conservation_vector(bd, [[1]]).tolist() == [1]
    dm = dimerization.network()
    best = sc.suggest_conservation_vector(dm, [[1, 1], [1, 2]])
    assert best.tolist() == [1, 2]
    assert sc.score_conservation_vector(dm, [1, 2]) == 1
    assert sc.score_conservation_vector(dm, [1, 1]) == 2
    # tie-break: equal score -> smaller l1 norm
    tie = sc.suggest_conservation_vector(bd, [[2], [1]])
    assert tie.tolist() == [1]
    with pytest.raises(sc.NetworkError, match="empty"):
        sc.suggest_conservation_vector(bd, [])

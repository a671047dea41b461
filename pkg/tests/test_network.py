import numpy as np
import pytest

import slackcme as sc
from slackcme.models import BUNDLED, three_node_cycle
from slackcme.network import integer_rank


def test_parse_reversible_pair():
    net = sc.parse_network("0 <-> X @ 1, 2")
    assert net.species_names() == ["X"]
    assert [c.stoich for c in net.complexes] == [(0,), (1,)]
    assert [(r.reactant, r.product, r.rate_constant) for r in net.reactions] == [
        (0, 1, 1.0),
        (1, 0, 2.0),
    ]


def test_parse_errors():
    with pytest.raises(sc.DslError, match="no reactions"):
        sc.parse_network("# just a comment\n")
    with pytest.raises(sc.DslError, match="reactant equals product"):
        sc.parse_network("X -> X @ 1")
    with pytest.raises(sc.DslError, match="positive"):
        sc.parse_network("0 -> X @ 0")
    with pytest.raises(sc.DslError, match="duplicate"):
        sc.parse_network("0 -> X @ 1\n0 -> X @ 2")
    err = None
    try:
        sc.parse_network("0 -> X @\n")
    except sc.DslError as exc:
        err = exc
    assert err is not None and err.line == 1 and err.col is not None


def test_parse_coefficients_and_comments():
    net = sc.parse_network(
        """
        # dimer formation
        2X1 + X2 -> X3 @ 0.5   # inline comment
        X3 -> 2X1 + X2 @ 1e-2
        """
    )
    assert net.species_names() == ["X1", "X2", "X3"]
    assert net.complexes[0].stoich == (2, 1, 0)
    assert net.reactions[1].rate_constant == pytest.approx(0.01)


def test_roundtrip_all_bundled():
    for model in BUNDLED.values():
        net = model.network()
        again = sc.parse_network(sc.format_network(net))
        assert again.species_names() == net.species_names()
        assert [c.stoich for c in again.complexes] == [c.stoich for c in net.complexes]
        assert [(r.reactant, r.product, r.rate_constant) for r in again.reactions] == [
            (r.reactant, r.product, r.rate_constant) for r in net.reactions
        ]


def test_example_cycle_matrices_exact():
    mats = sc.build_matrices(three_node_cycle.network())
    S_expected = np.array(
        [[-1, 1, 0, 0, -1], [1, -1, -1, 1, 0], [0, 0, 1, -1, 1]]
    )
    C_expected = np.array([[0, 1, 0], [0, 0, 1]])
    assert np.array_equal(mats.S, S_expected)
    assert np.array_equal(mats.C, C_expected)
    assert np.array_equal(mats.Gamma, C_expected @ S_expected)


def test_birth_death_gamma():
    mats = sc.build_matrices(sc.parse_network("0 <-> X @ 1, 2"))
    assert np.array_equal(mats.Gamma, [[1, -1]])


def test_gamma_is_c_times_s_everywhere():
    for model in BUNDLED.values():
        mats = sc.build_matrices(model.network())
        assert np.array_equal(mats.Gamma, mats.C @ mats.S)
        # one -1 and one +1 per column of S
        assert np.all(mats.S.sum(axis=0) == 0)
        assert np.all(np.abs(mats.S).sum(axis=0) == 2)


def test_intensity_mass_action():
    net = sc.parse_network("X -> 0 @ 2\n2X -> X2 @ 1\n0 -> X @ 5")
    assert sc.intensity(net, 0, (3, 0)) == 6.0
    assert sc.intensity(net, 1, (5, 0)) == 20.0  # 5 * 4
    assert sc.intensity(net, 1, (1, 0)) == 0.0
    assert sc.intensity(net, 2, (0, 0)) == 5.0


def test_intensity_positive_iff_dominating():
    rng = np.random.default_rng(0)
    net = sc.parse_network("2A + B -> C @ 1\nC -> 2A + B @ 1\nA -> 0 @ 1\n0 -> A @ 1")
    alpha = [np.array(net.complexes[r.reactant].stoich) for r in net.reactions]
    for _ in range(200):
        x = rng.integers(0, 4, size=3)
        for r in range(net.n_reactions):
            positive = sc.intensity(net, r, x) > 0
            assert positive == bool(np.all(x >= alpha[r]))


def test_weak_reversibility():
    assert sc.weak_reversibility(three_node_cycle.network()).is_weakly_reversible
    assert sc.weak_reversibility(sc.parse_network("0 <-> X @ 1, 1")).is_weakly_reversible
    report = sc.weak_reversibility(sc.parse_network("0 -> X @ 1"))
    assert not report.is_weakly_reversible
    assert report.linkage_classes == ((0, 1),)


def test_deficiency_values():
    assert sc.deficiency(sc.parse_network("0 <-> X @ 1, 1")) == 0
    assert sc.deficiency(three_node_cycle.network()) == 0


def test_integer_rank_exact():
    rng = np.random.default_rng(1)
    for _ in range(50):
        m = rng.integers(1, 5)
        n = rng.integers(1, 5)
        M = rng.integers(-3, 4, size=(m, n))
        assert integer_rank(M) == np.linalg.matrix_rank(M.astype(float))


def test_network_validation():
    with pytest.raises(sc.NetworkError, match="no reactions"):
        sc.ReactionNetwork(["X"], [sc.Complex((1,))], [])
    with pytest.raises(sc.NetworkError, match="positive"):
        sc.Reaction(0, 1, 0.0)
    with pytest.raises(sc.NetworkError, match="reactant equals product"):
        sc.Reaction(0, 0, 1.0)

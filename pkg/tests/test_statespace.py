import numpy as np
import pytest

import slackcme as sc
from slackcme.models import birth_death, lotka_volterra, three_node_cycle, toggle_switch


def test_birth_death_space():
    snet = sc.build_regular_slack(birth_death.network(), [[1]], [2])
    space = sc.enumerate_states(snet)
    assert space.states.tolist() == [[0], [1], [2]]


def test_lv_space_size_and_order():
    snet = sc.build_regular_slack(lotka_volterra.network(), [[1, 1]], [2])
    space = sc.enumerate_states(snet)
    assert space.states.tolist() == [[0, 0], [0, 1], [1, 0], [0, 2], [1, 1], [2, 0]]
    for n in (3, 5, 9):
        snet = sc.build_regular_slack(lotka_volterra.network(), [[1, 1]], [n])
        assert len(sc.enumerate_states(snet)) == (n + 1) * (n + 2) // 2


def test_toggle_space_product_count():
    net = toggle_switch.network()
    for n in (2, 5, 8):
        snet = sc.build_regular_slack(net, [toggle_switch.w[0]], [n])
        space = sc.enumerate_states(snet, x0=toggle_switch.x0)
        assert len(space) == 4 * (n + 1) * (n + 2) // 2
        # brute force cross-check
        count = 0
        for x in range(n + 1):
            for z in range(n + 1 - x):
                count += 4
        assert len(space) == count
        # gene conservation pinned at the initial levels
        assert np.all(space.states[:, 2] + space.states[:, 4] == 1)
        assert np.all(space.states[:, 3] + space.states[:, 5] == 1)


def test_toggle_requires_x0():
    net = toggle_switch.network()
    snet = sc.build_regular_slack(net, [toggle_switch.w[0]], [3])
    with pytest.raises(sc.NetworkError, match="x0"):
        sc.enumerate_states(snet)


def test_unbounded_species_detected():
    net = sc.parse_network("0 <-> A @ 1, 1\n0 <-> B @ 1, 1")
    snet = sc.build_regular_slack(net, [[1, 0]], [3])
    with pytest.raises(sc.NetworkError, match="B"):
        sc.enumerate_states(snet, x0=(0, 0))


def test_nested_spaces_are_prefixes():
    for model, W in ((birth_death, [[1]]), (lotka_volterra, [[1, 1]]),
                     (three_node_cycle, [[2, 1]])):
        net = model.network()
        spaces = []
        for n in (4, 7, 11):
            snet = sc.build_regular_slack(net, W, [n])
            spaces.append(sc.enumerate_states(snet))
        assert spaces[0].is_prefix_of(spaces[1])
        assert spaces[1].is_prefix_of(spaces[2])


def test_generator_birth_death_exact():
    snet = sc.build_regular_slack(birth_death.network(), [[1]], [1])
    space = sc.enumerate_states(snet)
    gen = sc.build_generator(space, snet)
    assert np.allclose(gen.matrix.toarray(), [[-1, 1], [2, -2]])


def test_generator_rows_sum_to_zero():
    for model in (lotka_volterra, three_node_cycle, toggle_switch):
        net = model.network()
        snet = sc.build_optimized_slack(net, list(model.w), [model.desk_N])
        space = sc.enumerate_states(snet, x0=model.x0)
        gen = sc.build_generator(space, snet)
        assert gen.row_sum_error() < 1e-12


def test_buffer_absorbing_state():
    gen = sc.build_finite_buffer(three_node_cycle.network(), [[2, 1]], [40], x0=(5, 5))
    row = gen.matrix[gen.space.position((0, 40))]
    assert row.nnz == 0
    classes = sc.communication_classes(gen, root=(5, 5))
    absorbing = [c for c in classes if c.absorbing]
    assert len(absorbing) == 1
    assert gen.space.states[absorbing[0].members[0]].tolist() == [0, 40]
    assert not all(c.closed for c in classes)


def test_slack_classes_closed_and_exclude_corner():
    N = 40
    snet = sc.build_regular_slack(three_node_cycle.network(), [[2, 1]], [N])
    space = sc.enumerate_states(snet)
    gen = sc.build_generator(space, snet)
    from_x0 = sc.communication_classes(gen, root=(5, 5))
    assert len(from_x0) == 1 and from_x0[0].closed
    corner = space.position((0, N))
    assert corner not in set(from_x0[0].members.tolist())
    # weakly reversible base: every class of the full simplex is closed
    assert all(c.closed for c in sc.communication_classes(gen))


def test_accessibility():
    N = 40
    x_t = (10, 10)
    buf = sc.build_finite_buffer(three_node_cycle.network(), [[2, 1]], [N])
    assert not sc.accessibility(buf, (0, N), [x_t])
    assert sc.accessibility(buf, (5, 5), [(0, N)])
    snet = sc.build_regular_slack(three_node_cycle.network(), [[2, 1]], [N])
    space = sc.enumerate_states(snet)
    gen = sc.build_generator(space, snet)
    assert sc.accessibility(gen, (5, 5), [x_t])
    assert sc.accessibility(gen, (5, 5), [(5, 5)])
    with pytest.raises(sc.NetworkError, match="disjoint"):
        sc.accessibility(gen, (5, 5), [(100, 100)])


def test_irreducible_two_state_single_class():
    net = sc.parse_network("A -> B @ 1\nB -> A @ 1")
    snet = sc.build_regular_slack(net, [[1, 1]], [1])
    space = sc.enumerate_states(snet)
    gen = sc.build_generator(space, snet)
    classes = sc.communication_classes(gen, root=(1, 0))
    assert len(classes) == 1 and classes[0].closed and len(classes[0].members) == 2


def test_matrix_market_export(tmp_path):
    import scipy.io

    snet = sc.build_regular_slack(birth_death.network(), [[1]], [3])
    space = sc.enumerate_states(snet)
    gen = sc.build_generator(space, snet)
    path = tmp_path / "generator.mtx"
    from slackcme.exports import write_generator_mtx

    write_generator_mtx(path, gen)
    header = path.read_text().splitlines()[0]
    assert header.startswith("%%MatrixMarket matrix coordinate real general")
    back = scipy.io.mmread(str(path))
    assert np.allclose(back.toarray(), gen.matrix.toarray())

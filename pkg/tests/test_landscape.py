import numpy as np
import pytest
from hypothesis import given, strategies as st

from bangbang.landscape import (
    BushCost,
    ConditionalHamming,
    Full,
    Hamming,
    aggregate,
    bush_cost,
    class_sizes,
    edge_classes,
    global_minima,
    hamming_weight,
    load_cost_table,
    make_custom,
    make_ramp,
    make_spike,
    spike_window,
    uniform_weights,
)


def test_hamming_weight_examples():
    assert hamming_weight("0000") == 0
    assert hamming_weight("1011") == 3
    assert hamming_weight([1] * 9) == 9
    assert hamming_weight(0b1011) == 3
    with pytest.raises(ValueError):
        hamming_weight("10a1")


@given(st.lists(st.integers(0, 1), min_size=1, max_size=40))
def test_complement_weight(bits):
    comp = [1 - b for b in bits]
    assert hamming_weight(comp) == len(bits) - hamming_weight(bits)


def test_spike_examples():
    c = make_spike(16, 0.5, 1)
    assert list(np.flatnonzero(spike_window(16, 0.5))) == [2, 3, 4, 5, 6]
    assert c.values[4] == 20
    assert c.values[0] == 0 and c.values[16] == 16
    c0 = make_spike(16, 0, 0)
    assert c0.values[4] == 5
    assert spike_window(16, 0).sum() == 1
    np.testing.assert_array_equal(c.ramp_part, np.arange(17))


def test_spike_rejects_bad_parameters():
    with pytest.raises(ValueError):
        make_spike(16, 1.5, 0.5)
    with pytest.raises(ValueError):
        make_spike(16, 0.5, -0.1)
    with pytest.raises(ValueError):
        make_spike(3, 0.5, 0.5)


@given(st.integers(4, 300), st.floats(0, 1), st.floats(0, 1))
def test_spike_decomposition_exact(n, a, b):
    c = make_spike(n, a, b)
    assert np.array_equal(c.values, c.ramp_part + c.pert_part)
    if n / 4 - n**a / 2 > 0:
        assert global_minima(c) == {0}


def test_ramp():
    np.testing.assert_array_equal(make_ramp(4).values, [0, 1, 2, 3, 4])
    np.testing.assert_array_equal(make_ramp(1).values, [0, 1])
    assert global_minima(make_ramp(8)) == {0}


def test_bush_cost():
    bc = BushCost(8)
    assert bush_cost(bc, 1, 7) == 1
    assert bush_cost(bc, 0, 0) == 0
    assert bush_cost(bc, 0, 5) == 5
    with pytest.raises(ValueError):
        bush_cost(bc, 0, 9)
    assert global_minima(bc) == {(0, 0)}
    assert global_minima(make_spike(16, 0.5, 1)) == {0}


def test_bush_full_matches_conditional():
    bc = BushCost(5)
    full = Full(6)
    agg = aggregate(bc.on(full), full, ConditionalHamming(5))
    np.testing.assert_allclose(agg / class_sizes(ConditionalHamming(5)), bc.on(ConditionalHamming(5)))


def test_basis_dimensions():
    assert Hamming(7).dim == 8
    assert ConditionalHamming(7).dim == 16
    assert Full(7).dim == 128
    with pytest.raises(ValueError):
        Full(13)
    b = ConditionalHamming(4)
    assert b.label(b.index((1, 3))) == (1, 3)


def test_uniform_weights_sum_to_one():
    for basis in (Hamming(9), ConditionalHamming(9), Full(5)):
        assert abs(uniform_weights(basis).sum() - 1) < 1e-12


def test_edge_multiplicities_count_neighbours():
    e = edge_classes(Hamming(5))
    out = np.zeros(6)
    np.add.at(out, e.src, e.mult)
    np.testing.assert_array_equal(out, 5)
    e = edge_classes(ConditionalHamming(5))
    out = np.zeros(12)
    np.add.at(out, e.src, e.mult)
    np.testing.assert_array_equal(out, 6)


def test_custom_split_must_be_exact():
    with pytest.raises(ValueError):
        from bangbang.landscape import SymmetricCost
        SymmetricCost(2, [0, 1, 2], [0, 1, 1], [0, 0, 0])
    c = make_custom([1.0, 0.0, 2.0], ramp_part=[0.0, 1.0, 2.0])
    np.testing.assert_array_equal(c.pert_part, [1.0, -1.0, 0.0])


def test_load_cost_table(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("# w c r s\n0 1 0 1\n1 1 1 0\n2 2\n")
    c = load_cost_table(p)
    assert c.n == 2
    np.testing.assert_array_equal(c.values, [1, 1, 2])
    np.testing.assert_array_equal(c.pert_part, [1, 0, 0])
    p.write_text("0 1\n2 2\n")
    with pytest.raises(ValueError, match="missing"):
        load_cost_table(p)
    p.write_text("0 1 0 0\n1 1\n")
    with pytest.raises(ValueError, match="r \\+ s"):
        load_cost_table(p)


def test_costs_are_immutable():
    c = make_ramp(4)
    with pytest.raises(ValueError):
        c.values[0] = 3

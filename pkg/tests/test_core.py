import numpy as np
import pytest

from stabjgl.core import (CovarianceSet, EdgeSet, GroupedDataset, PenaltyPair, PrecisionSet,
                          compute_sample_covariance, edge_set_from_precision,
                          partial_correlations, sparsity_of)
from stabjgl.exceptions import ZeroVarianceError


def test_dataset_shapes_and_readonly():
    rng = np.random.default_rng(0)
    d = GroupedDataset([rng.normal(size=(5, 3)), rng.normal(size=(7, 3))])
    assert d.K == 2 and d.p == 3 and d.n == (5, 7)
    with pytest.raises(ValueError):
        d.groups[0][0, 0] = 1.0


@pytest.mark.parametrize("groups", [
    [],
    [np.zeros((1, 3))],
    [np.zeros((4, 1))],
    [np.ones((4, 3)), np.ones((4, 2))],
    [np.array([[0.0, np.nan], [1.0, 2.0]])],
])
def test_dataset_rejects_bad_input(groups):
    with pytest.raises(ValueError):
        GroupedDataset(groups)


def test_dataset_name_lengths_checked():
    with pytest.raises(ValueError):
        GroupedDataset([np.eye(3)], variable_names=["a", "b"])
    with pytest.raises(ValueError):
        GroupedDataset([np.eye(3)], group_names=["a", "b"])


def test_take_selects_rows():
    x = np.arange(12.0).reshape(4, 3)
    d = GroupedDataset([x, x + 1], variable_names=["a", "b", "c"])
    sub = d.take([np.array([0, 2]), np.array([1, 3])])
    np.testing.assert_array_equal(sub.groups[0], x[[0, 2]])
    assert sub.variable_names == ("a", "b", "c")


def test_covariance_matches_numpy():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(30, 4)) * [1, 2, 3, 4]
    d = GroupedDataset([x])
    raw = compute_sample_covariance(d, standardize=False)
    np.testing.assert_allclose(raw.matrices[0], np.cov(x, rowvar=False), atol=1e-12)
    std = compute_sample_covariance(d, standardize=True)
    np.testing.assert_allclose(std.matrices[0], np.corrcoef(x, rowvar=False), atol=1e-12)
    np.testing.assert_array_equal(np.diag(std.matrices[0]), 1.0)
    assert raw.n == (30,)


def test_covariance_identity_like_2x2():
    x = np.array([[1.0, 0.0], [0.0, 1.0]])
    S = compute_sample_covariance(GroupedDataset([x])).matrices[0]
    np.testing.assert_allclose(np.diag(S), [1.0, 1.0])


def test_zero_variance_names_group_and_column():
    x = np.ones((5, 3))
    y = np.random.default_rng(0).normal(size=(5, 3))
    with pytest.raises(ZeroVarianceError) as info:
        compute_sample_covariance(GroupedDataset([y, x], variable_names=["a", "b", "c"],
                                                 group_names=["g1", "g2"]))
    assert info.value.group == "g2" and info.value.column == "a"


def test_covariance_set_validation():
    with pytest.raises(ValueError):
        CovarianceSet(np.array([[[1.0, 0.5], [0.4, 1.0]]]), (10,))
    with pytest.raises(ValueError):
        CovarianceSet(np.array([[[-1.0, 0.0], [0.0, 1.0]]]), (10,))


def test_partial_correlations():
    np.testing.assert_array_equal(partial_correlations(np.diag([2.0, 3.0])), np.eye(2))
    theta = np.array([[2.0, -1.0], [-1.0, 2.0]])
    pc = partial_correlations(theta)
    assert pc[0, 1] == pytest.approx(0.5)
    assert pc[1, 0] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        partial_correlations(np.array([[0.0, 0.1], [0.1, 1.0]]))


def test_edge_set_from_precision():
    z = np.zeros((4, 4))
    z[0, 2] = z[2, 0] = 0.05
    z[1, 3] = z[3, 1] = 1e-12
    e = edge_set_from_precision(z, 1e-10)
    assert set(e) == {(0, 2)}
    assert len(edge_set_from_precision(z, 0.0)) == 2


def test_edge_set_normalizes_and_rejects_loops():
    e = EdgeSet(4, frozenset({(2, 0), (1, 3)}))
    assert set(e) == {(0, 2), (1, 3)}
    assert (2, 0) in e
    with pytest.raises(ValueError):
        EdgeSet(3, frozenset({(1, 1)}))
    with pytest.raises(ValueError):
        EdgeSet(3, frozenset({(0, 3)}))


def test_edge_set_adjacency_roundtrip_and_degrees():
    e = EdgeSet(4, frozenset({(0, 1), (0, 2), (2, 3)}))
    adj = e.adjacency()
    assert (adj == adj.T).all() and not adj.diagonal().any()
    assert EdgeSet.from_adjacency(adj) == e
    np.testing.assert_array_equal(e.degrees(), [2, 1, 2, 1])
    assert set(e.relabel([3, 2, 1, 0])) == {(2, 3), (1, 3), (0, 1)}


def test_sparsity():
    assert sparsity_of(EdgeSet(4, frozenset())) == 0.0
    assert sparsity_of(EdgeSet(3, frozenset({(0, 1), (0, 2), (1, 2)}))) == 1.0
    assert sparsity_of(EdgeSet(100, frozenset((i, i + 1) for i in range(99)))) == pytest.approx(0.02)


def test_penalty_pair_validation():
    PenaltyPair(0.1, 0.0)
    with pytest.raises(ValueError):
        PenaltyPair(0.0, 0.1)
    with pytest.raises(ValueError):
        PenaltyPair(0.1, -0.1)


def test_precision_set_edges():
    theta = np.stack([np.eye(3), np.eye(3)])
    z = theta.copy()
    z[1, 0, 1] = z[1, 1, 0] = 0.3
    es = PrecisionSet(theta, z).edge_sets()
    assert [len(e) for e in es] == [0, 1]

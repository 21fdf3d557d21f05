"""Test 2-means hierarchies and stratum membership."""

from __future__ import annotations

from itertools import combinations
import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from hnc_navigation.clustering import (
    StratumMode,
    StratumQuery,
    hc_2means,
    is_narrow,
    is_standard,
    stratum_contains,
    stratum_margin,
    two_means_cost,
    two_means_split,
)
from hnc_navigation.configuration import Cluster, Configuration
from hnc_navigation.exceptions import DegenerateHyperplaneError, DomainError
from hnc_navigation.hierarchy import BinaryHierarchy

from . import LINE_POINTS, LINE_TREE


def _query(points: list[list[float]], text: str, mode: StratumMode) -> StratumQuery:
    return StratumQuery(
        config=Configuration(points, np.zeros(len(points))),
        tree=BinaryHierarchy.from_newick(text),
        mode=mode,
    )


def _best_bipartition(points: np.ndarray) -> tuple[Cluster, Cluster]:
    """Return the bipartition minimizing the within-cluster sum of squares."""
    labels = Cluster.full(len(points))
    candidates = [
        (Cluster.of(first), labels - Cluster.of(first))
        for size in range(1, len(points))
        for first in combinations(range(1, len(points) + 1), size)
    ]
    return min(candidates, key=lambda split: two_means_cost(points, split))


def test_two_means_split_line() -> None:
    """Test the split of two well separated pairs against brute force."""
    points = np.array(LINE_POINTS)

    split = two_means_split(points)

    assert split == (Cluster.of((1, 2)), Cluster.of((3, 4)))
    assert set(split) == set(_best_bipartition(points))


def test_two_means_split_two_points() -> None:
    """Test the forced split of two points."""
    assert two_means_split([[0.0, 0.0], [1.0, 1.0]]) == (
        Cluster.single(1),
        Cluster.single(2),
    )


def test_two_means_split_equilateral_tie() -> None:
    """Test that the tie rule keeps label 1 in a pair."""
    points = [[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]]

    left, right = two_means_split(points)

    assert 1 in left
    assert len(left) == 2
    assert (left, right) == (Cluster.of((1, 3)), Cluster.single(2))


def test_two_means_split_errors() -> None:
    """Test splits without two distinct points."""
    with pytest.raises(DomainError):
        two_means_split([[0.0, 0.0]])
    with pytest.raises(DomainError):
        two_means_split([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])


def test_two_means_split_of_partial_configuration() -> None:
    """Test splitting only the members of a cluster."""
    points = [[0.0, 0.0], [100.0, 0.0], [1.0, 0.0], [10.0, 0.0], [11.0, 0.0]]

    assert two_means_split(points, Cluster.of((1, 3, 4, 5))) == (
        Cluster.of((1, 3)),
        Cluster.of((4, 5)),
    )


def test_hc_2means() -> None:
    """Test the recursive hierarchy on a line and on three groups."""
    assert hc_2means(LINE_POINTS).to_newick() == LINE_TREE
    assert hc_2means([[0.0, 0.0], [3.0, 1.0]]).to_newick() == "(1,2);"
    groups = [
        [0.0, 0.0],
        [50.0, 0.0],
        [1.0, 0.5],
        [0.0, 60.0],
        [51.0, 1.0],
        [0.5, 61.0],
    ]
    tree = hc_2means(groups)

    assert {Cluster.of((1, 3)), Cluster.of((2, 5)), Cluster.of((4, 6))} <= tree.clusters


@pytest.mark.parametrize("mode", list(StratumMode))
def test_stratum_contains(mode: StratumMode) -> None:
    """Test membership for a supported and an unsupported tree."""
    points = [[0.0, 0.0], [1.0, 0.0], [10.0, 0.0]]

    assert stratum_contains(_query(points, "((1,2),3);", mode))
    assert not stratum_contains(_query(points, "((1,3),2);", mode))


def test_stratum_margin() -> None:
    """Test the smallest separation of a supported tree."""
    points = [[0.0, 0.0], [1.0, 0.0], [10.0, 0.0]]

    margin = stratum_margin(points, BinaryHierarchy.from_newick("((1,2),3);"))

    assert margin == pytest.approx(0.5)


def test_stratum_boundary_modes() -> None:
    """Test a point on a bisector against both tolerance modes."""
    points = [[0.0, 0.0], [2.0, 0.0], [-1.0, 5.0], [-1.0, -5.0]]

    assert stratum_contains(_query(points, LINE_TREE, StratumMode.CLOSED))
    assert not stratum_contains(_query(points, LINE_TREE, StratumMode.INTERIOR))


def test_stratum_degenerate_hyperplane() -> None:
    """Test coincident centroids in both tolerance modes."""
    points = [[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]

    assert not stratum_contains(_query(points, LINE_TREE, StratumMode.INTERIOR))
    with pytest.raises(DegenerateHyperplaneError):
        stratum_contains(_query(points, LINE_TREE, StratumMode.CLOSED))


def test_stratum_leaf_count_mismatch() -> None:
    """Test a tree over a different label set."""
    with pytest.raises(DomainError):
        stratum_contains(_query(LINE_POINTS, "((1,2),3);", StratumMode.CLOSED))


@pytest.mark.parametrize(("distance", "expected"), [(10.0, True), (2.1, True), (2.0, False)])
def test_is_narrow(distance: float, expected: bool) -> None:
    """Test narrowness of a singleton split of unit disks."""
    config = Configuration([[0.0, 0.0], [distance, 0.0]], [1.0, 1.0])

    assert is_narrow(config, (Cluster.single(1), Cluster.single(2))) is expected


def test_is_standard() -> None:
    """Test a configuration with scale separated levels."""
    config = Configuration([[0.0, 0.0], [5.0, 0.0], [100.0, 0.0], [105.0, 0.0]], np.ones(4))
    tree = BinaryHierarchy.from_newick(LINE_TREE)

    assert is_standard(config, tree)
    assert not is_standard(config.with_positions([[0, 0], [5, 0], [7, 0], [12, 0]]), tree)


random_points = st.tuples(
    st.integers(min_value=0, max_value=2**32 - 1),
    st.integers(min_value=3, max_value=8),
    st.sampled_from([2, 3]),
)


@settings(max_examples=50, deadline=None)
@given(random_points, st.floats(min_value=0.1, max_value=10))
def test_hc_2means_properties(params: tuple[int, int, int], scale: float) -> None:
    """Test closed stratum support, homogeneity and interior inclusion."""
    seed, n, dimension = params
    points = np.random.default_rng(seed).uniform(-10, 10, (n, dimension))
    tree = hc_2means(points)
    config = Configuration(points, np.zeros(n))

    assert stratum_contains(StratumQuery(config=config, tree=tree, mode=StratumMode.CLOSED))
    assert hc_2means(scale * points) == tree
    if stratum_contains(StratumQuery(config=config, tree=tree, mode=StratumMode.INTERIOR)):
        assert stratum_margin(points, tree) > 0


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.floats(min_value=0, max_value=2 * math.pi))
def test_rotation_of_standard_cluster(seed: int, angle: float) -> None:
    """Test that rotating a cluster of a standard configuration keeps the stratum."""
    rng = np.random.default_rng(seed)
    points = np.concatenate(
        [rng.uniform(-1, 1, (3, 2)), rng.uniform(-1, 1, (3, 2)) + [40.0, 0.0]]
    )
    config = Configuration(points, np.full(6, 0.1))
    tree = hc_2means(points)
    if not is_standard(config, tree):
        return
    members = Cluster.of((1, 2, 3)).indices
    center = points[members].mean(axis=0)
    rotation = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    rotated = points.copy()
    rotated[members] = (points[members] - center) @ rotation.T + center

    assert stratum_contains(
        StratumQuery(config=config.with_positions(rotated), tree=tree, mode=StratumMode.CLOSED)
    )


def test_label_permutation_invariance() -> None:
    """Test that relabeling points and leaves together preserves membership."""
    points = np.array([[0.0, 0.0], [1.0, 0.2], [10.0, 0.0], [11.5, -0.3]])
    permutation = [2, 0, 3, 1]
    permuted = points[permutation]
    relabel = {old + 1: new + 1 for new, old in enumerate(permutation)}
    tree = BinaryHierarchy.from_newick(LINE_TREE)
    permuted_tree = BinaryHierarchy.from_clusters(
        Cluster.of(relabel[label] for label in cluster) for cluster in tree.clusters
    )

    for mode in StratumMode:
        assert stratum_contains(
            StratumQuery(config=Configuration(points, np.zeros(4)), tree=tree, mode=mode)
        ) == stratum_contains(
            StratumQuery(
                config=Configuration(permuted, np.zeros(4)), tree=permuted_tree, mode=mode
            )
        )
    assert hc_2means(permuted) == permuted_tree

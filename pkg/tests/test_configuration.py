"""Test configurations, clusters and the scalar cluster functions."""

from __future__ import annotations

from hypothesis import assume, given, strategies as st
from hypothesis.extra.numpy import arrays
import numpy as np
import pytest

from hnc_navigation.configuration import (
    Cluster,
    ClusterFunctions,
    Configuration,
    centroid,
    centroid_midpoint,
    centroid_separation,
    cluster_radius,
    min_clearance,
    separation,
    validate,
)
from hnc_navigation.exceptions import DegenerateHyperplaneError, DomainError
from hnc_navigation.hierarchy import BinaryHierarchy

PAIRS = BinaryHierarchy.from_newick("((1,2),(3,4));")
TWO = BinaryHierarchy.from_newick("(1,2);")

coordinates = st.floats(min_value=-50, max_value=50, allow_nan=False)
four_points = arrays(np.float64, (4, 2), elements=coordinates)


def test_cluster_set_operations() -> None:
    """Test the bitset cluster operations."""
    first = Cluster.of((1, 3))
    second = Cluster.of((3, 4))

    assert list(first | second) == [1, 3, 4]
    assert first & second == Cluster.single(3)
    assert first - second == Cluster.single(1)
    assert len(first | second) == 3
    assert 3 in first
    assert 2 not in first
    assert Cluster.single(3).issubset(first)
    assert not first.isdisjoint(second)
    assert str(first) == "{1,3}"
    assert Cluster.full(4) == Cluster.of(range(1, 5))
    assert first.min_label == 1
    assert second.sort_key() == (2, 3)
    assert list(second.indices) == [2, 3]


def test_cluster_errors() -> None:
    """Test invalid clusters."""
    with pytest.raises(DomainError):
        Cluster.of((0, 1))
    with pytest.raises(DomainError):
        _ = Cluster().min_label


@pytest.mark.parametrize(
    ("positions", "radii"),
    [
        ([0.0, 1.0], [1.0, 1.0]),
        ([[0.0, 0.0], [1.0, 0.0]], [1.0]),
        ([[0.0, np.inf], [1.0, 0.0]], [1.0, 1.0]),
        ([[0.0, 0.0], [4.0, 0.0]], [1.0, -1.0]),
    ],
)
def test_configuration_invalid(positions: list, radii: list[float]) -> None:
    """Test that malformed configurations are rejected at construction."""
    with pytest.raises(DomainError):
        Configuration(positions, radii)


def test_configuration_is_read_only() -> None:
    """Test that the stored arrays cannot be modified."""
    config = Configuration([[0.0, 0.0], [3.0, 4.0]], [1.0, 1.0])

    with pytest.raises(ValueError, match="read-only"):
        config.positions[0, 0] = 1.0
    assert config.n == 2
    assert config.dimension == 2
    assert config.diameter == 5.0
    assert config.with_positions([[1.0, 1.0], [2.0, 2.0]]).radii.tolist() == [1.0, 1.0]


@pytest.mark.parametrize(
    ("positions", "expected"),
    [
        ([[0.0, 0.0], [2.5, 0.0]], []),
        ([[0.0, 0.0], [2.0, 0.0]], [(1, 2)]),
        ([[0.0, 0.0], [5.0, 0.0], [5.5, 0.0]], [(2, 3)]),
    ],
)
def test_validate(positions: list[list[float]], expected: list[tuple[int, int]]) -> None:
    """Test strict separation of unit disks."""
    config = Configuration(positions, np.ones(len(positions)))

    violations = validate(config)

    assert [(violation.first, violation.second) for violation in violations] == expected


def test_validate_reports_gap() -> None:
    """Test that violations carry the signed gap."""
    config = Configuration([[0.0, 0.0], [1.5, 0.0]], [1.0, 1.0])

    (violation,) = validate(config)

    assert violation.gap == pytest.approx(-0.5)
    assert min_clearance(config) == pytest.approx(-0.5)


def test_centroid() -> None:
    """Test centroids of partial configurations."""
    config = Configuration([[0.0, 0.0], [1.0, 0.0], [10.0, 0.0]], np.zeros(3))

    assert centroid(config, Cluster.of((1, 2))).tolist() == [0.5, 0.0]
    assert centroid(config, Cluster.single(3)).tolist() == [10.0, 0.0]
    with pytest.raises(DomainError):
        centroid(config, Cluster())


def test_separation_vector_and_midpoint() -> None:
    """Test e and m of a two robot configuration."""
    points = [[0.0, 0.0], [2.0, 0.0]]

    assert centroid_separation(points, TWO, Cluster.single(1)).tolist() == [-2.0, 0.0]
    assert centroid_separation(points, TWO, Cluster.single(2)).tolist() == [2.0, 0.0]
    assert centroid_midpoint(points, TWO, Cluster.single(1)).tolist() == [1.0, 0.0]
    with pytest.raises(DomainError):
        centroid_separation(points, TWO, Cluster.of((1, 2)))


def test_separation() -> None:
    """Test the signed distance to the bisector."""
    points = [[0.0, 0.0], [2.0, 0.0]]

    assert separation(points, TWO, 1, Cluster.single(1)) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        separation(points, TWO, 2, Cluster.single(1))


def test_separation_on_hyperplane() -> None:
    """Test that a point on the bisector has zero separation."""
    points = [[0.0, 0.0], [2.0, 0.0], [-1.0, 5.0], [-1.0, -5.0]]

    assert separation(points, PAIRS, 1, Cluster.of((1, 2))) == pytest.approx(0.0)


def test_separation_degenerate() -> None:
    """Test coincident sibling centroids."""
    points = [[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]

    assert centroid_separation(points, PAIRS, Cluster.of((1, 2))).tolist() == [0.0, 0.0]
    with pytest.raises(DegenerateHyperplaneError):
        separation(points, PAIRS, 1, Cluster.of((1, 2)))


@pytest.mark.parametrize(
    ("positions", "radii", "cluster", "expected"),
    [
        ([[3.0, 4.0], [10.0, 0.0]], [1.0, 1.0], Cluster.single(1), 1.0),
        ([[0.0, 0.0], [10.0, 0.0]], [1.0, 1.0], Cluster.of((1, 2)), 6.0),
        ([[0.0, 0.0], [6.0, 8.0]], [0.0, 0.0], Cluster.of((1, 2)), 5.0),
    ],
)
def test_cluster_radius(
    positions: list[list[float]], radii: list[float], cluster: Cluster, expected: float
) -> None:
    """Test the radius of the centroid-centered ball holding a cluster."""
    assert cluster_radius(Configuration(positions, radii), cluster) == pytest.approx(
        expected
    )


def test_cluster_functions_counts_evaluations() -> None:
    """Test the cached cluster functions."""
    points = [[0.0, 0.0], [2.0, 0.0], [10.0, 3.0], [12.0, 5.0]]
    functions = ClusterFunctions(points, PAIRS)

    assert functions.centroid(PAIRS.root).tolist() == [6.0, 2.0]
    separations = functions.separations(Cluster.of((3, 4)))

    assert functions.separation_evaluations == 2
    assert separations == pytest.approx(
        [separation(points, PAIRS, label, Cluster.of((3, 4))) for label in (3, 4)]
    )


@given(four_points)
def test_sibling_identity(points: np.ndarray) -> None:
    """Test that s_i(I) + s_j(sibling) is the projection of x_i - x_j."""
    cluster = Cluster.of((1, 2))
    normal = centroid_separation(points, PAIRS, cluster)
    assume(np.linalg.norm(normal) > 0.1)
    unit = normal / np.linalg.norm(normal)

    total = separation(points, PAIRS, 1, cluster) + separation(
        points, PAIRS, 3, Cluster.of((3, 4))
    )

    assert total == pytest.approx((points[0] - points[2]) @ unit, abs=1e-9)


@given(four_points, arrays(np.float64, (2,), elements=coordinates))
def test_translation_invariance(points: np.ndarray, offset: np.ndarray) -> None:
    """Test that a common translation changes no cluster function."""
    cluster = Cluster.of((1, 2))
    assume(np.linalg.norm(centroid_separation(points, PAIRS, cluster)) > 0.1)
    moved = points + offset

    assert separation(moved, PAIRS, 2, cluster) == pytest.approx(
        separation(points, PAIRS, 2, cluster), abs=1e-8
    )
    assert centroid_separation(moved, PAIRS, cluster) == pytest.approx(
        centroid_separation(points, PAIRS, cluster), abs=1e-8
    )
    assert cluster_radius(Configuration(moved, np.ones(4)), cluster) == pytest.approx(
        cluster_radius(Configuration(points, np.ones(4)), cluster), abs=1e-8
    )


@given(four_points, st.floats(min_value=0.1, max_value=10))
def test_separation_homogeneity(points: np.ndarray, scale: float) -> None:
    """Test that scaling all positions scales the separation."""
    cluster = Cluster.of((3, 4))
    assume(np.linalg.norm(centroid_separation(points, PAIRS, cluster)) > 0.1)

    assert separation(scale * points, PAIRS, 4, cluster) == pytest.approx(
        scale * separation(points, PAIRS, 4, cluster), abs=1e-8
    )


@given(four_points)
def test_weighted_centroid_union(points: np.ndarray) -> None:
    """Test the weighted centroid of a disjoint union."""
    first, second = Cluster.single(1), Cluster.of((2, 4))

    combined = (
        len(first) * centroid(points, first) + len(second) * centroid(points, second)
    ) / 3

    assert centroid(points, first | second) == pytest.approx(combined, abs=1e-9)

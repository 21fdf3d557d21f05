"""Configurations of disk robots and the scalar cluster functions."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import logging
from typing import TYPE_CHECKING, Self

import numpy as np
import numpy.typing as npt

from .exceptions import DegenerateHyperplaneError, DomainError

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator

    from .hierarchy import BinaryHierarchy

_LOGGER = logging.getLogger(__name__)

type Points = npt.NDArray[np.float64]


@dataclass(frozen=True)
class Cluster:
    """Set of robot labels stored as a bitset, bit k - 1 holding label k."""

    mask: int = 0

    @classmethod
    def of(cls, labels: Iterable[int]) -> Self:
        """Construct a cluster from 1-based labels."""
        mask = 0
        for label in labels:
            if label < 1:
                raise DomainError(f"label {label} is not positive")
            mask |= 1 << (label - 1)
        return cls(mask)

    @classmethod
    def single(cls, label: int) -> Self:
        """Construct a singleton cluster."""
        return cls.of((label,))

    @classmethod
    def full(cls, n: int) -> Self:
        """Construct the cluster of all labels 1..n."""
        return cls((1 << n) - 1)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __iter__(self) -> Iterator[int]:
        mask = self.mask
        while mask:
            lowest = mask & -mask
            yield lowest.bit_length()
            mask ^= lowest

    def __contains__(self, label: object) -> bool:
        return isinstance(label, int) and label >= 1 and bool(self.mask >> (label - 1) & 1)

    def __or__(self, other: Cluster) -> Cluster:
        return Cluster(self.mask | other.mask)

    def __and__(self, other: Cluster) -> Cluster:
        return Cluster(self.mask & other.mask)

    def __sub__(self, other: Cluster) -> Cluster:
        return Cluster(self.mask & ~other.mask)

    def __str__(self) -> str:
        return "{" + ",".join(str(label) for label in self) + "}"

    def issubset(self, other: Cluster) -> bool:
        """Return True if every member is also a member of other."""
        return self.mask & ~other.mask == 0

    def isdisjoint(self, other: Cluster) -> bool:
        """Return True if the clusters share no member."""
        return self.mask & other.mask == 0

    @property
    def min_label(self) -> int:
        """Return the smallest member label."""
        if not self.mask:
            raise DomainError("empty cluster has no members")
        return (self.mask & -self.mask).bit_length()

    @cached_property
    def indices(self) -> npt.NDArray[np.intp]:
        """Return the 0-based row indices of the members."""
        return np.fromiter((label - 1 for label in self), dtype=np.intp, count=len(self))

    def sort_key(self) -> tuple[int, int]:
        """Order clusters by cardinality, then by smallest member label."""
        return len(self), self.min_label


@dataclass(frozen=True, eq=False)
class Configuration:
    """Centers and radii of n labeled disks in R^d."""

    positions: Points
    radii: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        """Normalize and freeze the arrays."""
        positions = np.array(self.positions, dtype=float)
        radii = np.array(self.radii, dtype=float)
        if positions.ndim != 2 or positions.shape[0] < 1 or positions.shape[1] < 1:
            raise DomainError(f"positions must be an (n, d) array, got {positions.shape}")
        if radii.shape != (positions.shape[0],):
            raise DomainError(
                f"expected {positions.shape[0]} radii, got shape {radii.shape}"
            )
        if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(radii))):
            raise DomainError("coordinates and radii must be finite")
        if np.any(radii < 0):
            raise DomainError("radii must be non-negative")
        positions.setflags(write=False)
        radii.setflags(write=False)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "radii", radii)

    @property
    def n(self) -> int:
        """Return the number of disks."""
        return self.positions.shape[0]

    @property
    def dimension(self) -> int:
        """Return the dimension of the ambient space."""
        return self.positions.shape[1]

    @property
    def labels(self) -> Cluster:
        """Return the cluster of all labels."""
        return Cluster.full(self.n)

    @property
    def diameter(self) -> float:
        """Return the largest distance between two centers."""
        if self.n < 2:
            return 0.0
        deltas = self.positions[:, None, :] - self.positions[None, :, :]
        return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", deltas, deltas))))

    def with_positions(self, positions: npt.ArrayLike) -> Configuration:
        """Return a configuration with the same radii at new centers."""
        return Configuration(positions, self.radii)


@dataclass(frozen=True, kw_only=True)
class CollisionViolation:
    """A pair of disks violating strict separation."""

    first: int
    second: int
    gap: float


def as_points(source: Configuration | npt.ArrayLike) -> Points:
    """Return the (n, d) array behind a configuration or velocity assignment."""
    if isinstance(source, Configuration):
        return source.positions
    return np.asarray(source, dtype=float)


def _member_rows(points: Points, cluster: Cluster) -> Points:
    if not cluster:
        raise DomainError("empty cluster")
    if cluster.mask >> points.shape[0]:
        raise DomainError(f"cluster {cluster} has labels beyond {points.shape[0]}")
    return points[cluster.indices]


def pairwise_gaps(config: Configuration) -> npt.NDArray[np.float64]:
    """Return ||x_i - x_j|| - r_i - r_j for every pair, with +inf on the diagonal."""
    deltas = config.positions[:, None, :] - config.positions[None, :, :]
    gaps = np.sqrt(np.einsum("ijk,ijk->ij", deltas, deltas)) - (
        config.radii[:, None] + config.radii[None, :]
    )
    np.fill_diagonal(gaps, np.inf)
    return gaps


def validate(config: Configuration) -> list[CollisionViolation]:
    """Return the pairs of disks that overlap or touch, empty when valid."""
    gaps = pairwise_gaps(config)
    firsts, seconds = np.nonzero(np.triu(gaps <= 0, k=1))
    violations = [
        CollisionViolation(first=int(i) + 1, second=int(j) + 1, gap=float(gaps[i, j]))
        for i, j in zip(firsts, seconds, strict=True)
    ]
    if violations:
        _LOGGER.debug("Collisions: %s", violations)
    return violations


def min_clearance(config: Configuration) -> float:
    """Return the smallest pairwise gap, +inf for a single disk."""
    return float(np.min(pairwise_gaps(config)))


def centroid(config: Configuration | npt.ArrayLike, cluster: Cluster) -> Points:
    """Return the arithmetic mean of the member positions."""
    return _member_rows(as_points(config), cluster).mean(axis=0)


def centroid_separation(
    config: Configuration | npt.ArrayLike, tree: BinaryHierarchy, cluster: Cluster
) -> Points:
    """Return c(x|I) - c(x|sibling of I)."""
    sibling = tree.sibling(cluster)
    return centroid(config, cluster) - centroid(config, sibling)


def centroid_midpoint(
    config: Configuration | npt.ArrayLike, tree: BinaryHierarchy, cluster: Cluster
) -> Points:
    """Return the midpoint between the centroids of I and its sibling."""
    sibling = tree.sibling(cluster)
    return (centroid(config, cluster) + centroid(config, sibling)) / 2


def separation(
    config: Configuration | npt.ArrayLike,
    tree: BinaryHierarchy,
    label: int,
    cluster: Cluster,
) -> float:
    """Return the signed distance of x_label to the bisector of I and its sibling."""
    if label not in cluster:
        raise DomainError(f"label {label} is not a member of {cluster}")
    points = as_points(config)
    normal = centroid_separation(points, tree, cluster)
    if not (norm := float(np.linalg.norm(normal))):
        raise DegenerateHyperplaneError(str(cluster))
    midpoint = centroid_midpoint(points, tree, cluster)
    return float((points[label - 1] - midpoint) @ normal / norm)


def cluster_radius(config: Configuration, cluster: Cluster) -> float:
    """Return the radius of the smallest centroid-centered ball holding the disks."""
    members = _member_rows(config.positions, cluster)
    center = members.mean(axis=0)
    return float(
        np.max(np.linalg.norm(members - center, axis=1) + config.radii[cluster.indices])
    )


class ClusterFunctions:
    """
    Cluster functions of one point set against one tree.

    Centroids of all clusters are computed bottom-up in a single pass, so every
    later query is O(|I|).
    """

    def __init__(self, points: Configuration | npt.ArrayLike, tree: BinaryHierarchy) -> None:
        """Compute all cluster centroids."""
        self.points = as_points(points)
        self.tree = tree
        self.separation_evaluations = 0
        if self.points.shape[0] != tree.n:
            raise DomainError(
                f"tree has {tree.n} leaves, configuration has {self.points.shape[0]}"
            )
        self._centroids: dict[Cluster, Points] = {}
        for cluster in tree.postorder():
            if len(cluster) == 1:
                self._centroids[cluster] = self.points[cluster.min_label - 1]
                continue
            left, right = tree.children(cluster)
            self._centroids[cluster] = (
                len(left) * self._centroids[left] + len(right) * self._centroids[right]
            ) / len(cluster)

    def centroid(self, cluster: Cluster) -> Points:
        """Return c(x|I)."""
        return self._centroids[cluster]

    def separation_vector(self, cluster: Cluster) -> Points:
        """Return e_I = c(x|I) - c(x|sibling)."""
        return self._centroids[cluster] - self._centroids[self.tree.sibling(cluster)]

    def midpoint(self, cluster: Cluster) -> Points:
        """Return m_I, the midpoint of the two sibling centroids."""
        return (
            self._centroids[cluster] + self._centroids[self.tree.sibling(cluster)]
        ) / 2

    def unit_normal(self, cluster: Cluster) -> tuple[Points, float]:
        """Return the unit vector along e_I and the norm of e_I."""
        normal = self.separation_vector(cluster)
        if not (norm := float(np.linalg.norm(normal))):
            raise DegenerateHyperplaneError(str(cluster))
        return normal / norm, norm

    def separations(self, cluster: Cluster) -> npt.NDArray[np.float64]:
        """Return s_k for every member k of I, in ascending label order."""
        unit, _ = self.unit_normal(cluster)
        self.separation_evaluations += len(cluster)
        return (self.points[cluster.indices] - self.midpoint(cluster)) @ unit

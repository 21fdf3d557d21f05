"""Divisive 2-means cluster hierarchies and stratum membership."""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
import logging
from typing import TYPE_CHECKING

import numpy as np

from .configuration import (
    Cluster,
    ClusterFunctions,
    Configuration,
    as_points,
    centroid,
    cluster_radius,
)
from .const import EPS_GEOM, LLOYD_MAX_ITERATIONS
from .exceptions import DegenerateHyperplaneError, DomainError
from .hierarchy import BinaryHierarchy

if TYPE_CHECKING:
    import numpy.typing as npt

_LOGGER = logging.getLogger(__name__)


class StratumMode(StrEnum):
    """Tolerance mode of a stratum test."""

    CLOSED = "closed"
    INTERIOR = "interior"


@dataclass(frozen=True, kw_only=True)
class StratumQuery:
    """A stratum membership question with an explicit tolerance mode."""

    config: Configuration
    tree: BinaryHierarchy
    mode: StratumMode


def two_means_split(
    config: Configuration | npt.ArrayLike, cluster: Cluster | None = None
) -> tuple[Cluster, Cluster]:
    """
    Split a partial configuration with Lloyd's 2-means iteration.

    The centers start at the farthest pair of points (lowest index pair on ties)
    and points equidistant from both centers join the first one. The blocks are
    returned ordered by smallest label.
    """
    points = as_points(config)
    if cluster is None:
        cluster = Cluster.full(points.shape[0])
    labels = list(cluster)
    if len(labels) < 2:
        raise DomainError(f"cannot split {cluster}, need at least two points")
    sub = points[cluster.indices]
    deltas = sub[:, None, :] - sub[None, :, :]
    squared = np.einsum("ijk,ijk->ij", deltas, deltas)
    upper = np.triu(np.ones_like(squared, dtype=bool), k=1)
    if np.any(squared[upper] == 0):
        raise DomainError(f"points of {cluster} are not distinct")
    first, second = np.unravel_index(
        np.argmax(np.where(upper, squared, -1.0)), squared.shape
    )
    centers = sub[[first, second]]
    assignment = np.zeros(len(labels), dtype=np.intp)
    for iteration in range(LLOYD_MAX_ITERATIONS):
        distances = np.einsum(
            "ijk,ijk->ij", sub[:, None, :] - centers[None], sub[:, None, :] - centers[None]
        )
        updated = (distances[:, 1] < distances[:, 0]).astype(np.intp)
        if iteration and np.array_equal(updated, assignment):
            break
        assignment = updated
        centers = np.stack(
            [sub[assignment == 0].mean(axis=0), sub[assignment == 1].mean(axis=0)]
        )
    else:
        _LOGGER.debug("Lloyd iteration cap reached while splitting %s", cluster)
    blocks = (
        Cluster.of(label for label, side in zip(labels, assignment, strict=True) if not side),
        Cluster.of(label for label, side in zip(labels, assignment, strict=True) if side),
    )
    left, right = sorted(blocks, key=lambda block: block.min_label)
    return left, right


def two_means_cost(
    config: Configuration | npt.ArrayLike, bipartition: tuple[Cluster, Cluster]
) -> float:
    """Return the within-cluster sum of squared distances of a bipartition."""
    points = as_points(config)
    return float(
        sum(
            np.sum((points[block.indices] - centroid(points, block)) ** 2)
            for block in bipartition
        )
    )


def hc_2means(config: Configuration | npt.ArrayLike) -> BinaryHierarchy:
    """Build the cluster hierarchy by recursive 2-means splitting."""
    points = as_points(config)
    root = Cluster.full(points.shape[0])
    clusters = {root}
    pending = [root]
    while pending:
        cluster = pending.pop()
        if len(cluster) < 2:
            continue
        children = two_means_split(points, cluster)
        clusters.update(children)
        pending.extend(children)
    tree = BinaryHierarchy.from_clusters(clusters)
    _LOGGER.debug("2-means hierarchy: %s", tree)
    return tree


def functions_in_stratum(functions: ClusterFunctions, mode: StratumMode) -> bool:
    """Return True if precomputed cluster functions satisfy the stratum inequalities."""
    tree = functions.tree
    for cluster in tree.postorder():
        if cluster == tree.root:
            continue
        try:
            separations = functions.separations(cluster)
        except DegenerateHyperplaneError:
            if mode is StratumMode.INTERIOR:
                return False
            raise
        if mode is StratumMode.CLOSED:
            if np.any(separations < -EPS_GEOM):
                return False
        elif np.any(separations <= EPS_GEOM):
            return False
    return True


def stratum_contains(query: StratumQuery) -> bool:
    """Return True if the configuration supports the tree in the query's mode."""
    if query.tree.n != query.config.n:
        raise DomainError(
            f"tree has {query.tree.n} leaves, configuration has {query.config.n}"
        )
    return functions_in_stratum(ClusterFunctions(query.config, query.tree), query.mode)


def stratum_margin(config: Configuration | npt.ArrayLike, tree: BinaryHierarchy) -> float:
    """Return the smallest separation over every non-root cluster."""
    functions = ClusterFunctions(config, tree)
    return min(
        (
            float(np.min(functions.separations(cluster)))
            for cluster in tree.postorder()
            if cluster != tree.root
        ),
        default=float("inf"),
    )


def is_narrow(config: Configuration, bipartition: tuple[Cluster, Cluster]) -> bool:
    """Return True if both blocks fit in balls of half the centroid gap."""
    first, second = bipartition
    gap = float(np.linalg.norm(centroid(config, first) - centroid(config, second)))
    return max(cluster_radius(config, first), cluster_radius(config, second)) < gap / 2


def is_standard(config: Configuration, tree: BinaryHierarchy) -> bool:
    """Return True if the configuration is narrow at every local split of the tree."""
    return all(
        is_narrow(config, tree.children(cluster))  # type: ignore[arg-type]
        for cluster in tree.internal_clusters()
    )

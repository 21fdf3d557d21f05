"""Portal maps realizing NNI moves in configuration space."""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import TYPE_CHECKING, Self

import numpy as np

from .clustering import StratumMode, StratumQuery, stratum_contains
from .configuration import (
    ClusterFunctions,
    Configuration,
    as_points,
    centroid,
    cluster_radius,
)
from .const import DEFAULT_ALPHA, EPS_GEOM
from .exceptions import (
    AsymmetricConfigurationError,
    DegenerateTriangleError,
    DomainError,
    NotAdjacentError,
)
from .hierarchy import BinaryHierarchy, NniTriplet, nni_triplet

if TYPE_CHECKING:
    import numpy.typing as npt

    from .configuration import Cluster, Points

_LOGGER = logging.getLogger(__name__)

type Triangle3 = npt.NDArray[np.float64]

_CENTROID_OFFSET = 1 / (2 * math.sqrt(3))
_COLLINEAR_TOLERANCE = 1e-9


@dataclass(frozen=True, kw_only=True)
class PortalContext:
    """An NNI-adjacent tree pair with its triplet and safety margin."""

    source: BinaryHierarchy
    target: BinaryHierarchy
    triplet: NniTriplet
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self) -> None:
        """Check the triplet against the tree pair."""
        if self.source.clusters - self.target.clusters != {
            self.triplet.a | self.triplet.b
        } or self.target.clusters - self.source.clusters != {
            self.triplet.b | self.triplet.c
        }:
            raise NotAdjacentError(f"triplet does not match {self.source} and {self.target}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")

    @classmethod
    def from_trees(
        cls,
        source: BinaryHierarchy,
        target: BinaryHierarchy,
        alpha: float = DEFAULT_ALPHA,
    ) -> Self:
        """Construct the context of an adjacent tree pair."""
        return cls(
            source=source,
            target=target,
            triplet=nni_triplet(source, target),
            alpha=alpha,
        )


def _plane_basis(tri: Triangle3) -> tuple[Points, npt.NDArray[np.float64]]:
    """Return the centroid and an orthonormal basis (2, d) of the triangle's plane."""
    if tri.shape != (3, tri.shape[1]) or tri.shape[1] < 2:
        raise DomainError(f"expected three points in R^d with d >= 2, got {tri.shape}")
    edges = np.array([tri[1] - tri[0], tri[2] - tri[1], tri[0] - tri[2]])
    lengths = np.linalg.norm(edges, axis=1)
    if not (scale := float(lengths.max())):
        raise DegenerateTriangleError(str(tri.tolist()))
    longest = int(np.argmax(lengths))
    first = edges[longest] / lengths[longest]
    residuals = edges - np.outer(edges @ first, first)
    residual_norms = np.linalg.norm(residuals, axis=1)
    if residual_norms.max() > _COLLINEAR_TOLERANCE * scale:
        widest = int(np.argmax(residual_norms))
        second = residuals[widest] / residual_norms[widest]
    else:
        axes = np.eye(tri.shape[1])
        axes -= np.outer(axes @ first, first)
        norms = np.linalg.norm(axes, axis=1)
        chosen = int(np.argmax(norms > 0.5))
        second = axes[chosen] / norms[chosen]
    return tri.mean(axis=0), np.stack([first, second])


def _outer_napoleon_2d(points: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Return the centroids of the outer equilaterals, vertex i opposite edge i."""
    (ax, ay), (bx, by) = points[1] - points[0], points[2] - points[0]
    orientation = 1.0 if ax * by - ay * bx >= 0 else -1.0
    out = np.empty_like(points)
    for vertex in range(3):
        start, end = points[(vertex + 1) % 3], points[(vertex + 2) % 3]
        edge = end - start
        left_normal = np.array([-edge[1], edge[0]])
        out[vertex] = (start + end) / 2 - orientation * _CENTROID_OFFSET * left_normal
    return out


def napoleon_outer(tri: npt.ArrayLike) -> Triangle3:
    """Return the outer Napoleon triangle."""
    points = np.asarray(tri, dtype=float)
    center, basis = _plane_basis(points)
    return center + _outer_napoleon_2d((points - center) @ basis.T) @ basis


def napoleon_double_outer(tri: npt.ArrayLike) -> Triangle3:
    """Return the outer Napoleon triangle of the outer Napoleon triangle."""
    points = np.asarray(tri, dtype=float)
    center, basis = _plane_basis(points)
    planar = _outer_napoleon_2d(_outer_napoleon_2d((points - center) @ basis.T))
    return center + planar @ basis


def napoleon_offset_and_centroids(
    config: Configuration | npt.ArrayLike, triplet: NniTriplet
) -> tuple[Points, tuple[Points, Points, Points]]:
    """Return the offset and the equilateral centroid targets of A, B and C."""
    points = as_points(config)
    members = triplet.members
    targets = napoleon_double_outer(
        np.stack([centroid(points, cluster) for cluster in members])
    )
    weights = np.array([len(cluster) for cluster in members]) / len(triplet.p)
    offset = centroid(points, triplet.p) - weights @ targets
    first, second, third = targets + offset
    return offset, (first, second, third)


def is_symmetric(config: Configuration | npt.ArrayLike, context: PortalContext) -> bool:
    """Return True if the centroids of A, B and C form an equilateral triangle."""
    points = as_points(config)
    tri = np.stack([centroid(points, cluster) for cluster in context.triplet.members])
    sides = np.linalg.norm(tri - np.roll(tri, 1, axis=0), axis=1)
    return float(sides.max() - sides.min()) <= EPS_GEOM * max(1.0, float(sides.max()))


def consensus_radius(
    config: Configuration | npt.ArrayLike, context: PortalContext, cluster: Cluster
) -> float:
    """Return the radius of the ball around c(x|Q) supporting both trees."""
    if cluster not in context.triplet.members:
        raise DomainError(f"{cluster} is not a member of the NNI triplet")
    points = as_points(config)
    if not is_symmetric(points, context):
        raise AsymmetricConfigurationError
    center = centroid(points, cluster)
    radius = math.inf
    for tree in (context.source, context.target):
        functions = ClusterFunctions(points, tree)
        for plane in (cluster, tree.parent(cluster)):
            if plane == context.triplet.p:
                continue
            unit, _ = functions.unit_normal(plane)
            radius = min(radius, float((center - functions.midpoint(plane)) @ unit))
    return radius


def portal_center(config: Configuration, context: PortalContext) -> Configuration:
    """Translate A, B and C rigidly onto their equilateral centroid targets."""
    _, targets = napoleon_offset_and_centroids(config, context.triplet)
    positions = np.array(config.positions)
    for cluster, target in zip(context.triplet.members, targets, strict=True):
        positions[cluster.indices] += target - centroid(config, cluster)
    return config.with_positions(positions)


def portal_scale(config: Configuration, context: PortalContext) -> Configuration:
    """Push A, B and C radially from c(x|P) until each fits its consensus ball."""
    members = context.triplet.members
    radii = [consensus_radius(config, context, cluster) for cluster in members]
    if min(radii) <= EPS_GEOM:
        raise DegenerateTriangleError(f"consensus radii {radii} are not positive")
    scale = (
        max(
            max((cluster_radius(config, cluster) + context.alpha) / radius, 1.0)
            for cluster, radius in zip(members, radii, strict=True)
        )
        - 1.0
    )
    _LOGGER.debug("Portal scale parameter %s", scale)
    if not scale:
        return config
    parent_centroid = centroid(config, context.triplet.p)
    positions = np.array(config.positions)
    for cluster in members:
        positions[cluster.indices] += scale * (centroid(config, cluster) - parent_centroid)
    return config.with_positions(positions)


def portal_separate(
    config: Configuration, tree: BinaryHierarchy, cluster: Cluster, alpha: float
) -> Configuration:
    """Separate a cluster and its sibling until every member clears r + alpha."""
    functions = ClusterFunctions(config, tree)
    parent = tree.parent(cluster)
    sibling = parent - cluster
    gain = max(
        float(
            np.max(
                np.maximum(
                    -(functions.separations(side) - config.radii[side.indices] - alpha),
                    0.0,
                )
            )
        )
        for side in (cluster, sibling)
    )
    if not gain:
        return config
    _LOGGER.debug("Separating %s from %s by %s", cluster, sibling, gain)
    positions = np.array(config.positions)
    for side, other in ((cluster, sibling), (sibling, cluster)):
        unit, _ = functions.unit_normal(side)
        positions[side.indices] += 2 * gain * len(other) / len(parent) * unit
    return config.with_positions(positions)


def portal_merge(config: Configuration, context: PortalContext) -> Configuration:
    """Separate P and each of its ancestors from their siblings, bottom-up."""
    tree = context.source
    cluster = context.triplet.p
    while cluster != tree.root:
        config = portal_separate(config, tree, cluster, context.alpha)
        cluster = tree.parent(cluster)
    return config


def in_portal(config: Configuration, context: PortalContext) -> bool:
    """Return True if the configuration lies in the interior strata of both trees."""
    return all(
        stratum_contains(StratumQuery(config=config, tree=tree, mode=StratumMode.INTERIOR))
        for tree in (context.source, context.target)
    )


def portal_map(config: Configuration, context: PortalContext) -> Configuration:
    """Return a configuration supporting both trees of the adjacent pair."""
    if in_portal(config, context):
        return config
    return portal_merge(portal_scale(portal_center(config, context), context), context)

"""Hierarchy-preserving navigation field and its substratum policies."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
import logging
import math
from typing import TYPE_CHECKING

import numpy as np

from .clustering import StratumMode, StratumQuery, functions_in_stratum, stratum_contains
from .configuration import Cluster, ClusterFunctions, Configuration, as_points
from .const import DEFAULT_ALPHA, DEFAULT_BETA, EPS_GEOM
from .exceptions import (
    DomainError,
    NotAClusterError,
    OutsideDomainError,
    OutsideStratumError,
)

if TYPE_CHECKING:
    from collections.abc import Iterator

    import numpy.typing as npt

    from .configuration import Points
    from .hierarchy import BinaryHierarchy

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, kw_only=True)
class FieldParams:
    """Goal, tree and safety margins of one navigation field."""

    goal: Configuration
    tree: BinaryHierarchy
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA

    def __post_init__(self) -> None:
        """Validate the margins and the goal."""
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not self.beta > self.alpha:
            raise DomainError(f"beta must exceed alpha, got {self.beta} <= {self.alpha}")
        if not stratum_contains(
            StratumQuery(config=self.goal, tree=self.tree, mode=StratumMode.CLOSED)
        ):
            raise OutsideStratumError(f"goal does not support {self.tree}")

    @cached_property
    def goal_functions(self) -> ClusterFunctions:
        """Return the cluster functions of the goal."""
        return ClusterFunctions(self.goal, self.tree)


@dataclass(frozen=True)
class PolicyIndex:
    """A tree-compatible partition with one sign per block."""

    blocks: tuple[Cluster, ...]
    signs: tuple[int, ...]

    def __post_init__(self) -> None:
        """Check signs and disjointness of the blocks."""
        if len(self.blocks) != len(self.signs):
            raise DomainError("one sign per block is required")
        if any(sign not in (-1, 1) for sign in self.signs):
            raise DomainError(f"signs must be -1 or +1, got {self.signs}")
        union = Cluster()
        for block in self.blocks:
            if not block or block & union:
                raise DomainError(f"blocks are not disjoint and nonempty: {self}")
            union |= block

    def __iter__(self) -> Iterator[tuple[Cluster, int]]:
        return zip(self.blocks, self.signs, strict=True)

    def __str__(self) -> str:
        return " ".join(
            f"{block}{'+' if sign > 0 else '-'}" for block, sign in self
        )

    def sign(self, cluster: Cluster) -> int | None:
        """Return the sign of a block, None if the cluster is not a block."""
        return dict(self).get(cluster)


def priority(index: PolicyIndex) -> int:
    """Return the priority, the signed sum of squared block sizes."""
    return sum(sign * len(block) ** 2 for block, sign in index)


class HierarchyField:
    """
    Evaluate the navigation field of one tree and goal at one configuration.

    Centroids of the configuration are computed once; membership in the
    attracting sets is memoized through the child decomposition so a full
    sweep over the tree stays quadratic in the number of disks.
    """

    def __init__(
        self,
        params: FieldParams,
        x: Configuration | npt.ArrayLike,
        *,
        check_stratum: bool = True,
    ) -> None:
        """Prepare the cluster functions of x."""
        self.params = params
        self.tree = params.tree
        self.x = as_points(x)
        if self.x.shape != params.goal.positions.shape:
            raise DomainError(
                f"configuration shape {self.x.shape} does not match the goal "
                f"{params.goal.positions.shape}"
            )
        self.y = params.goal.positions
        self.radii = params.goal.radii
        self.functions = ClusterFunctions(self.x, self.tree)
        self.goal_functions = params.goal_functions
        self._in_set_a: dict[Cluster, bool] = {}
        self._in_set_h: dict[Cluster, bool] = {}
        if check_stratum and not functions_in_stratum(self.functions, StratumMode.CLOSED):
            raise OutsideStratumError(f"configuration does not support {self.tree}")

    @property
    def separation_evaluations(self) -> int:
        """Return how many separations have been evaluated so far."""
        return self.functions.separation_evaluations

    def attracting_field(self, u: Points, cluster: Cluster) -> Points:
        """Replace the velocities of I by the goal attraction -(x - y)."""
        out = np.array(u, dtype=float)
        members = cluster.indices
        out[members] = -(self.x[members] - self.y[members])
        return out

    def in_set_a(self, cluster: Cluster) -> bool:
        """Return True if attraction keeps I collision free and aligned with the goal."""
        if (known := self._in_set_a.get(cluster)) is not None:
            return known
        members = cluster.indices
        # A cluster at its goal is attracted with zero velocity.
        if len(cluster) == 1 or np.array_equal(self.x[members], self.y[members]):
            result = True
        else:
            left, right = self.tree.children(cluster)
            result = (
                self.in_set_a(left)
                and self.in_set_a(right)
                and self._attracting_pair(left, right)
            )
        self._in_set_a[cluster] = result
        return result

    def _attracting_pair(self, left: Cluster, right: Cluster) -> bool:
        dx = self.x[left.indices][:, None, :] - self.x[right.indices][None, :, :]
        dy = self.y[left.indices][:, None, :] - self.y[right.indices][None, :, :]
        bound = (self.radii[left.indices][:, None] + self.radii[right.indices][None, :]) ** 2
        if np.any(np.einsum("ijk,ijk->ij", dx, dy) < bound + EPS_GEOM):
            return False
        for cluster in (left, right):
            members = cluster.indices
            alignment = (self.y[members] - self.goal_functions.midpoint(cluster)) @ (
                self.functions.separation_vector(cluster)
            ) + (self.x[members] - self.functions.midpoint(cluster)) @ (
                self.goal_functions.separation_vector(cluster)
            )
            if np.any(alignment < EPS_GEOM):
                return False
        return True

    def in_set_h(self, cluster: Cluster) -> bool:
        """Return True if the children of I are separated by at least r + alpha."""
        if (known := self._in_set_h.get(cluster)) is None:
            known = self._in_set_h[cluster] = all(
                np.all(
                    self.functions.separations(child)
                    >= self.radii[child.indices] + self.params.alpha + EPS_GEOM
                )
                for child in self.tree.children(cluster)
            )
        return known

    def separation_lie_derivative(self, u: Points, cluster: Cluster) -> npt.NDArray[np.float64]:
        """Return the rate of change of s_k along u for every member k of I."""
        sibling = self.tree.sibling(cluster)
        members = cluster.indices
        normal = self.functions.separation_vector(cluster)
        norm = float(np.linalg.norm(normal))
        u_centroid = u[members].mean(axis=0)
        u_sibling = u[sibling.indices].mean(axis=0)
        u_normal = u_centroid - u_sibling
        u_midpoint = (u_centroid + u_sibling) / 2
        separations = self.functions.separations(cluster)
        return (
            (u[members] - u_midpoint) @ normal
            + (self.x[members] - self.functions.midpoint(cluster)) @ u_normal
        ) / norm - separations * (normal @ u_normal) / norm**2

    def repulsion_gain(self, u: Points, cluster: Cluster) -> float:
        """Return the split-preserving repulsion gain of I under input u."""
        alpha, beta = self.params.alpha, self.params.beta
        floor = math.exp(-(beta - alpha))
        gain = 0.0
        for child in self.tree.children(cluster):
            excess = (
                self.functions.separations(child) - self.radii[child.indices] - alpha
            )
            envelope = np.maximum((np.exp(-excess) - floor) / (1 - floor), 0.0)
            magnitude = np.maximum(
                -excess - self.separation_lie_derivative(u, child), 0.0
            )
            gain = max(gain, float(np.max(envelope * magnitude)))
        return gain

    def split_preserving_field(self, u: Points, cluster: Cluster) -> Points:
        """Add the repulsion that keeps the children of I apart to u."""
        out = np.array(u, dtype=float)
        if len(cluster) == 1:
            return out
        if gain := self.repulsion_gain(out, cluster):
            self._push_apart(out, cluster, gain)
        return out

    def separation_gain(self, cluster: Cluster) -> float:
        """Return the repulsion gain driving the children of I beyond r + beta."""
        return max(
            float(
                np.max(
                    np.maximum(
                        -(
                            self.functions.separations(child)
                            - self.radii[child.indices]
                            - self.params.beta
                        ),
                        0.0,
                    )
                )
            )
            for child in self.tree.children(cluster)
        )

    def separation_field(self, u: Points, cluster: Cluster) -> Points:
        """Move I with its centroid toward the goal while pushing its children apart."""
        if len(cluster) == 1:
            return self.attracting_field(u, cluster)
        out = np.array(u, dtype=float)
        out[cluster.indices] = -(
            self.functions.centroid(cluster) - self.goal_functions.centroid(cluster)
        )
        self._push_apart(out, cluster, self.separation_gain(cluster))
        return out

    def _push_apart(self, out: Points, cluster: Cluster, gain: float) -> None:
        left, right = self.tree.children(cluster)
        for child, other in ((left, right), (right, left)):
            unit, _ = self.functions.unit_normal(child)
            out[child.indices] += 2 * gain * len(other) / len(cluster) * unit

    def evaluate(self) -> Points:
        """Return f(x) by the post-order recursion from the root."""
        return self._field(np.zeros_like(self.x), self.tree.root)

    def _field(self, u: Points, cluster: Cluster) -> Points:
        if self.in_set_a(cluster):
            return self.attracting_field(u, cluster)
        if not self.in_set_h(cluster):
            return self.separation_field(u, cluster)
        left, right = self.tree.children(cluster)
        u = self._field(u, left)
        u = self._field(u, right)
        return self.split_preserving_field(u, cluster)

    def select_policy(self) -> PolicyIndex:
        """Return the highest priority substratum policy whose domain holds x."""
        blocks: list[Cluster] = []
        signs: list[int] = []
        pending = [self.tree.root]
        while pending:
            cluster = pending.pop()
            if self.in_set_a(cluster):
                blocks.append(cluster)
                signs.append(1)
            elif not self.in_set_h(cluster):
                blocks.append(cluster)
                signs.append(-1)
            else:
                left, right = self.tree.children(cluster)
                pending.extend((right, left))
        return PolicyIndex(tuple(blocks), tuple(signs))

    def in_policy_domain(self, index: PolicyIndex) -> bool:
        """Return True if x lies in the domain of the substratum policy."""
        union = Cluster()
        for block, _ in index:
            if block not in self.tree:
                raise NotAClusterError(str(block))
            union |= block
        if union != self.tree.root:
            raise DomainError(f"blocks of {index} do not cover {self.tree.root}")
        for block, sign in index:
            if sign > 0 and not self.in_set_a(block):
                return False
            if not all(self.in_set_h(ancestor) for ancestor in self.tree.ancestors(block)):
                return False
        return True

    def policy(self, index: PolicyIndex) -> Points:
        """Return the substratum policy h(P, b) at x."""
        if not self.in_policy_domain(index):
            raise OutsideDomainError(str(index))
        return self._policy(np.zeros_like(self.x), self.tree.root, dict(index))

    def _policy(self, u: Points, cluster: Cluster, signs: dict[Cluster, int]) -> Points:
        if (sign := signs.get(cluster)) is not None:
            if sign > 0:
                return self.attracting_field(u, cluster)
            return self.separation_field(u, cluster)
        left, right = self.tree.children(cluster)
        u = self._policy(u, left, signs)
        u = self._policy(u, right, signs)
        return self.split_preserving_field(u, cluster)


def hier_field(params: FieldParams, x: Configuration | npt.ArrayLike) -> Points:
    """Return the hierarchy-preserving navigation field at x."""
    return HierarchyField(params, x).evaluate()


def policy_select(params: FieldParams, x: Configuration | npt.ArrayLike) -> PolicyIndex:
    """Return the substratum policy index selected at x."""
    index = HierarchyField(params, x).select_policy()
    _LOGGER.debug("Selected policy %s with priority %d", index, priority(index))
    return index


def policy_domain_contains(
    params: FieldParams, index: PolicyIndex, x: Configuration | npt.ArrayLike
) -> bool:
    """Return True if x lies in the domain of the substratum policy."""
    return HierarchyField(params, x).in_policy_domain(index)


def substratum_policy(
    params: FieldParams, index: PolicyIndex, x: Configuration | npt.ArrayLike
) -> Points:
    """Return the substratum policy h(P, b) at x."""
    return HierarchyField(params, x).policy(index)


def navigation_potential(params: FieldParams, x: Configuration | npt.ArrayLike) -> float:
    """Return half the squared distance to the goal."""
    return float(np.sum((as_points(x) - params.goal.positions) ** 2) / 2)


def compatible_partitions(tree: BinaryHierarchy) -> list[tuple[Cluster, ...]]:
    """Return every partition of the labels into clusters of the tree."""

    def below(cluster: Cluster) -> list[tuple[Cluster, ...]]:
        partitions = [(cluster,)]
        if children := tree.children(cluster):
            left, right = children
            partitions.extend(
                first + second
                for first, second in product(below(left), below(right))
            )
        return partitions

    return below(tree.root)

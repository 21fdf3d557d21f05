"""Rooted binary cluster hierarchies, NNI moves and the NNI navigation law."""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math
from typing import TYPE_CHECKING, NoReturn, Self

from .configuration import Cluster
from .exceptions import (
    DomainError,
    NavigationBoundError,
    NotAClusterError,
    NotAdjacentError,
    TreeParseError,
)

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator

_LOGGER = logging.getLogger(__name__)

type NestedTree = int | tuple[NestedTree, NestedTree]


@dataclass(frozen=True, kw_only=True)
class ClusterRelations:
    """Relations of one cluster within a tree."""

    parent: Cluster | None
    children: tuple[Cluster, ...]
    ancestors: tuple[Cluster, ...]
    descendants: tuple[Cluster, ...]
    local_complement: Cluster | None


@dataclass(frozen=True, kw_only=True)
class NniTriplet:
    """The three clusters regrouped by an NNI move, ((A, B), C) to (A, (B, C))."""

    a: Cluster
    b: Cluster
    c: Cluster

    @property
    def p(self) -> Cluster:
        """Return the common parent cluster A | B | C."""
        return self.a | self.b | self.c

    @property
    def members(self) -> tuple[Cluster, Cluster, Cluster]:
        """Return (A, B, C)."""
        return self.a, self.b, self.c


@dataclass(frozen=True)
class BinaryHierarchy:
    """
    Rooted non-degenerate tree over the labels 1..n.

    The tree is identified by its cluster set; two trees are equal iff their
    cluster sets are equal. Children are ordered by smallest member label.
    """

    clusters: frozenset[Cluster]
    root: Cluster = field(init=False, repr=False, compare=False)
    _parents: dict[Cluster, Cluster] = field(init=False, repr=False, compare=False)
    _children: dict[Cluster, tuple[Cluster, Cluster]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        """Validate the cluster set and derive parent and child links."""
        if not self.clusters or not all(self.clusters):
            raise DomainError("a tree needs nonempty clusters")
        ordered = sorted(self.clusters, key=lambda cluster: (len(cluster), cluster.mask))
        root = ordered[-1]
        n = len(root)
        if root != Cluster.full(n):
            raise DomainError(f"root {root} is not the label set 1..{n}")
        if len(self.clusters) != 2 * n - 1:
            raise DomainError(f"expected {2 * n - 1} clusters, got {len(self.clusters)}")
        parents: dict[Cluster, Cluster] = {}
        members: dict[Cluster, list[Cluster]] = {cluster: [] for cluster in ordered}
        for index, cluster in enumerate(ordered[:-1]):
            parent = next(
                (
                    candidate
                    for candidate in ordered[index + 1 :]
                    if len(candidate) > len(cluster) and cluster.issubset(candidate)
                ),
                None,
            )
            if parent is None:
                raise DomainError(f"cluster {cluster} is not nested in the root")
            parents[cluster] = parent
            members[parent].append(cluster)
        children: dict[Cluster, tuple[Cluster, Cluster]] = {}
        for cluster, kids in members.items():
            if len(cluster) == 1:
                continue
            if len(kids) != 2 or kids[0] | kids[1] != cluster or kids[0] & kids[1]:
                raise DomainError(f"cluster {cluster} is not split into two children")
            left, right = sorted(kids, key=lambda kid: kid.min_label)
            children[cluster] = (left, right)
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "_parents", parents)
        object.__setattr__(self, "_children", children)

    @classmethod
    def from_clusters(cls, clusters: Iterable[Cluster]) -> Self:
        """Construct a tree from its cluster set."""
        return cls(frozenset(clusters))

    @classmethod
    def from_nested(cls, nested: NestedTree) -> Self:
        """Construct a tree from nested pairs of integer labels."""
        clusters: set[Cluster] = set()

        def collect(node: NestedTree) -> Cluster:
            if isinstance(node, int):
                cluster = Cluster.single(node)
            elif isinstance(node, (tuple, list)) and len(node) == 2:
                left, right = collect(node[0]), collect(node[1])
                if not left.isdisjoint(right):
                    raise DomainError(f"label repeated in {node}")
                cluster = left | right
            else:
                raise DomainError(f"not a binary node: {node!r}")
            clusters.add(cluster)
            return cluster

        collect(nested)
        return cls.from_clusters(clusters)

    @classmethod
    def from_newick(cls, text: str) -> Self:
        """Parse the integer-leaf Newick form, for example ((1,2),(3,4));."""
        parser = _NewickParser(text)
        nested = parser.parse()
        try:
            return cls.from_nested(nested)
        except DomainError as err:
            raise TreeParseError(f"{text!r}: {err}") from err

    @property
    def n(self) -> int:
        """Return the number of leaves."""
        return len(self.root)

    def __contains__(self, cluster: object) -> bool:
        return cluster in self.clusters

    def __str__(self) -> str:
        return self.to_newick()

    def to_newick(self) -> str:
        """Return the canonical Newick form."""

        def render(cluster: Cluster) -> str:
            if len(cluster) == 1:
                return str(cluster.min_label)
            left, right = self._children[cluster]
            return f"({render(left)},{render(right)})"

        return render(self.root) + ";"

    def _require(self, cluster: Cluster) -> None:
        if cluster not in self.clusters:
            raise NotAClusterError(str(cluster))

    def parent(self, cluster: Cluster) -> Cluster:
        """Return the parent cluster."""
        self._require(cluster)
        if cluster == self.root:
            raise DomainError("the root has no parent")
        return self._parents[cluster]

    def sibling(self, cluster: Cluster) -> Cluster:
        """Return the local complement, parent minus the cluster."""
        return self.parent(cluster) - cluster

    local_complement = sibling

    def children(self, cluster: Cluster) -> tuple[Cluster, ...]:
        """Return the children ordered by smallest label, empty for a leaf."""
        self._require(cluster)
        return self._children.get(cluster, ())

    def ancestors(self, cluster: Cluster) -> tuple[Cluster, ...]:
        """Return the ancestors from the parent up to the root."""
        self._require(cluster)
        chain: list[Cluster] = []
        while cluster != self.root:
            cluster = self._parents[cluster]
            chain.append(cluster)
        return tuple(chain)

    def descendants(self, cluster: Cluster) -> tuple[Cluster, ...]:
        """Return the strict descendants in post-order."""
        return tuple(self.postorder(cluster))[:-1]

    def postorder(self, cluster: Cluster | None = None) -> Iterator[Cluster]:
        """Iterate over a subtree children first, lowest label first."""
        start = self.root if cluster is None else cluster
        self._require(start)
        stack: list[tuple[Cluster, bool]] = [(start, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded or len(node) == 1:
                yield node
                continue
            left, right = self._children[node]
            stack.extend(((node, True), (right, False), (left, False)))

    def internal_clusters(self) -> list[Cluster]:
        """Return the nonsingleton clusters in post-order."""
        return [cluster for cluster in self.postorder() if len(cluster) > 1]


class _NewickParser:
    """Recursive descent parser for node := leaf | "(" node "," node ")"."""

    def __init__(self, text: str) -> None:
        self.text = "".join(text.split())
        self.position = 0

    def parse(self) -> NestedTree:
        node = self._node()
        self._expect(";")
        if self.position != len(self.text):
            self._fail("trailing characters")
        return node

    def _fail(self, reason: str) -> NoReturn:
        raise TreeParseError(f"{reason} at offset {self.position} in {self.text!r}")

    def _peek(self) -> str:
        return self.text[self.position] if self.position < len(self.text) else ""

    def _expect(self, char: str) -> None:
        if self._peek() != char:
            self._fail(f"expected {char!r}")
        self.position += 1

    def _node(self) -> NestedTree:
        if self._peek() == "(":
            self.position += 1
            left = self._node()
            self._expect(",")
            right = self._node()
            self._expect(")")
            return left, right
        start = self.position
        while self._peek().isdigit():
            self.position += 1
        if start == self.position:
            self._fail("expected a leaf label")
        return int(self.text[start : self.position])


def cluster_relations(tree: BinaryHierarchy, cluster: Cluster) -> ClusterRelations:
    """Return parent, children, ancestors, descendants and local complement."""
    is_root = cluster == tree.root
    return ClusterRelations(
        parent=None if is_root else tree.parent(cluster),
        children=tree.children(cluster),
        ancestors=tree.ancestors(cluster),
        descendants=tree.descendants(cluster),
        local_complement=None if is_root else tree.sibling(cluster),
    )


def nni_move(tree: BinaryHierarchy, cluster: Cluster) -> BinaryHierarchy:
    """Swap a cluster with its parent's sibling; the empty cluster is the identity."""
    if not cluster:
        return tree
    parent = tree.parent(cluster)
    if parent == tree.root:
        raise DomainError(f"cluster {cluster} has no grandparent")
    uncle = tree.sibling(parent)
    sibling = parent - cluster
    return BinaryHierarchy.from_clusters(
        (tree.clusters - {parent}) | {sibling | uncle}
    )


def nni_neighbors(tree: BinaryHierarchy) -> list[BinaryHierarchy]:
    """Return all trees one NNI move away."""
    return [
        nni_move(tree, cluster)
        for cluster in tree.postorder()
        if cluster != tree.root and tree.parent(cluster) != tree.root
    ]


def _require_same_labels(first: BinaryHierarchy, second: BinaryHierarchy) -> None:
    if first.root != second.root:
        raise DomainError(f"trees over {first.root} and {second.root}")


def nni_adjacent(first: BinaryHierarchy, second: BinaryHierarchy) -> bool:
    """Return True if the trees differ by exactly one NNI move."""
    _require_same_labels(first, second)
    return len(first.clusters - second.clusters) == 1


def nni_triplet(source: BinaryHierarchy, target: BinaryHierarchy) -> NniTriplet:
    """Return the triplet with {A | B} = C(source) - C(target), {B | C} the reverse."""
    if not nni_adjacent(source, target):
        raise NotAdjacentError(f"{source} and {target}")
    (lost,) = source.clusters - target.clusters
    (gained,) = target.clusters - source.clusters
    return NniTriplet(a=lost - gained, b=lost & gained, c=gained - lost)


def count_trees(n: int) -> int:
    """Return (2n - 3)!!, the number of rooted binary trees over n labels."""
    if n < 2:
        raise DomainError(f"need at least two leaves, got {n}")
    return math.prod(range(2 * n - 3, 0, -2))


def enumerate_trees(n: int) -> list[BinaryHierarchy]:
    """Return every rooted binary tree over 1..n, by successive leaf insertion."""
    if n < 2:
        raise DomainError(f"need at least two leaves, got {n}")
    layer = [frozenset({Cluster.single(1), Cluster.single(2), Cluster.of((1, 2))})]
    for label in range(3, n + 1):
        leaf = Cluster.single(label)
        layer = [
            frozenset(
                {
                    other | leaf if edge.issubset(other) and other != edge else other
                    for other in clusters
                }
                | {edge | leaf, leaf}
            )
            for clusters in layer
            for edge in sorted(clusters, key=lambda cluster: cluster.mask)
        ]
    return [BinaryHierarchy(clusters) for clusters in layer]


def nni_control(current: BinaryHierarchy, goal: BinaryHierarchy) -> Cluster:
    """Return the cluster whose NNI move brings current closer to goal, empty at the goal."""
    _require_same_labels(current, goal)
    if current == goal:
        return Cluster()
    common = min(
        (
            cluster
            for cluster in current.clusters & goal.clusters
            if len(cluster) > 1 and current.children(cluster) != goal.children(cluster)
        ),
        key=Cluster.sort_key,
    )
    goal_left, goal_right = goal.children(common)
    splits: list[tuple[Cluster, Cluster, Cluster]] = []
    for cluster in current.internal_clusters():
        if not cluster.issubset(common):
            continue
        first, second = current.children(cluster)
        if first.issubset(goal_left) and second.issubset(goal_right):
            splits.append((cluster, first, second))
        elif second.issubset(goal_left) and first.issubset(goal_right):
            splits.append((cluster, second, first))
    cluster, left, right = min(splits, key=lambda split: split[0].sort_key())
    sibling = current.sibling(cluster)
    if sibling.issubset(goal_left):
        move = right
    elif sibling.issubset(goal_right):
        move = left
    else:
        move = left
    _LOGGER.debug(
        "NNI control: common %s, split %s, sibling %s, move %s",
        common,
        cluster,
        sibling,
        move,
    )
    return move


def nni_navigate(source: BinaryHierarchy, goal: BinaryHierarchy) -> list[BinaryHierarchy]:
    """Iterate the NNI control law from source until it reaches goal."""
    _require_same_labels(source, goal)
    bound = (source.n - 1) * (source.n - 2) // 2
    path = [source]
    while path[-1] != goal:
        if len(path) > bound:
            raise NavigationBoundError(f"{source} to {goal} after {bound} moves")
        path.append(nni_move(path[-1], nni_control(path[-1], goal)))
    return path

"""Hierarchical navigation control for disk robots."""

from __future__ import annotations

from .clustering import (
    StratumMode,
    StratumQuery,
    hc_2means,
    is_narrow,
    is_standard,
    stratum_contains,
    two_means_split,
)
from .configuration import (
    Cluster,
    ClusterFunctions,
    CollisionViolation,
    Configuration,
    centroid,
    centroid_midpoint,
    centroid_separation,
    cluster_radius,
    separation,
    validate,
)
from .exceptions import DomainError, HncError, ScenarioError
from .executor import (
    EventKind,
    ExecutorMode,
    HncExecutor,
    HybridState,
    RunOutcome,
    RunResult,
    RunStats,
    TraceEvent,
    async_run_batch,
    run_hnc,
    step,
)
from .field import (
    FieldParams,
    HierarchyField,
    PolicyIndex,
    hier_field,
    policy_select,
    priority,
    substratum_policy,
)
from .hierarchy import (
    BinaryHierarchy,
    NniTriplet,
    cluster_relations,
    count_trees,
    nni_adjacent,
    nni_control,
    nni_move,
    nni_navigate,
    nni_triplet,
)
from .portal import (
    PortalContext,
    consensus_radius,
    napoleon_double_outer,
    napoleon_offset_and_centroids,
    portal_center,
    portal_map,
    portal_merge,
    portal_scale,
)
from .scenario import Scenario, validate_scenario

__all__ = [
    "BinaryHierarchy",
    "Cluster",
    "ClusterFunctions",
    "CollisionViolation",
    "Configuration",
    "DomainError",
    "EventKind",
    "ExecutorMode",
    "FieldParams",
    "HierarchyField",
    "HncError",
    "HncExecutor",
    "HybridState",
    "NniTriplet",
    "PolicyIndex",
    "PortalContext",
    "RunOutcome",
    "RunResult",
    "RunStats",
    "Scenario",
    "ScenarioError",
    "StratumMode",
    "StratumQuery",
    "TraceEvent",
    "async_run_batch",
    "centroid",
    "centroid_midpoint",
    "centroid_separation",
    "cluster_radius",
    "cluster_relations",
    "consensus_radius",
    "count_trees",
    "hc_2means",
    "hier_field",
    "is_narrow",
    "is_standard",
    "napoleon_double_outer",
    "napoleon_offset_and_centroids",
    "nni_adjacent",
    "nni_control",
    "nni_move",
    "nni_navigate",
    "nni_triplet",
    "policy_select",
    "portal_center",
    "portal_map",
    "portal_merge",
    "portal_scale",
    "priority",
    "run_hnc",
    "separation",
    "step",
    "stratum_contains",
    "substratum_policy",
    "two_means_split",
    "validate",
    "validate_scenario",
]

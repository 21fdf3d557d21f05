"""Exceptions raised by the hierarchical navigation control package."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from collections.abc import Mapping


class HncError(Exception):
    """Base class for exceptions in this package."""

    msg = "Navigation error"

    def __init__(self, detail: str | None = None) -> None:
        """Initialize the exception."""
        self.detail = detail
        super().__init__(f"{self.msg}: {detail}" if detail else self.msg)

    def __reduce__(self) -> tuple[Any, ...]:
        return type(self), (self.detail,)


class DomainError(HncError, ValueError):
    """Exception raised when an operation is called outside its domain."""

    msg = "Input outside the domain of the operation"


class NotAClusterError(DomainError):
    """Exception raised when a label set is not a cluster of the tree."""

    msg = "Not a cluster of the tree"


class DegenerateHyperplaneError(DomainError):
    """Exception raised when sibling cluster centroids coincide."""

    msg = "Separating hyperplane is undefined, cluster centroids coincide"


class DegenerateTriangleError(DomainError):
    """Exception raised when all triangle vertices coincide."""

    msg = "Triangle vertices coincide"


class NotAdjacentError(DomainError):
    """Exception raised when two trees are not one NNI move apart."""

    msg = "Trees are not NNI-adjacent"


class AsymmetricConfigurationError(DomainError):
    """Exception raised when NNI-triplet centroids are not equilateral."""

    msg = "Configuration is not symmetric for the tree pair"


class OutsideStratumError(DomainError):
    """Exception raised when a configuration does not support the tree."""

    msg = "Configuration is outside the stratum of the tree"


class OutsideDomainError(DomainError):
    """Exception raised when a configuration is outside a policy domain."""

    msg = "Configuration is outside the policy domain"


class TreeParseError(HncError, ValueError):
    """Exception raised for malformed tree text."""

    msg = "Could not parse tree"


class NavigationBoundError(HncError):
    """Exception raised when NNI navigation exceeds its path bound."""

    msg = "NNI navigation exceeded its path bound"


class IntegrationError(HncError):
    """Exception raised when a post-step check fails."""

    msg = "Integration step left the admissible set"


class ScenarioError(HncError):
    """Exception raised for invalid scenarios."""

    msg = "Invalid scenario"

    def __init__(
        self,
        errors: Mapping[str, str],
        details: Mapping[str, str] | None = None,
    ) -> None:
        """Initialize the exception."""
        self.errors = dict(errors)
        self.details = dict(details or {})
        super().__init__(
            ", ".join(f"{field} ({key})" for field, key in self.errors.items())
        )

    def __reduce__(self) -> tuple[Any, ...]:
        return type(self), (self.errors, self.details)

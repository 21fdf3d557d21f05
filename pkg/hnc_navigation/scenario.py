"""Scenario files: schema, cross-field validation and translated error messages."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cache
import json
import math
from pathlib import Path
from typing import TYPE_CHECKING, Any, Self

import voluptuous as vol

from .clustering import StratumMode, StratumQuery, stratum_contains
from .configuration import Configuration, validate
from .const import DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_DT, DEFAULT_T_MAX, LOGGER
from .exceptions import ScenarioError, TreeParseError
from .hierarchy import BinaryHierarchy

if TYPE_CHECKING:
    from collections.abc import Mapping

CONF_ALPHA = "alpha"
CONF_BETA = "beta"
CONF_DIMENSION = "dimension"
CONF_DT = "dt"
CONF_GOAL = "goal"
CONF_GOAL_TOL = "goal_tol"
CONF_GOAL_TREE = "goal_tree"
CONF_INITIAL = "initial"
CONF_NAME = "name"
CONF_PERTURB_SEED = "perturb_seed"
CONF_RADII = "radii"
CONF_T_MAX = "t_max"

TRANSLATIONS_PATH = Path(__file__).parent / "translations" / "en.json"


def _finite(value: float) -> float:
    if not math.isfinite(value):
        raise vol.Invalid("expected a finite number")
    return value


def _positive(value: float) -> float:
    if not value > 0:
        raise vol.Invalid("expected a positive number")
    return value


_NUMBER = vol.All(vol.Coerce(float), _finite)
_POSITIVE = vol.All(_NUMBER, _positive)

SCENARIO_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_NAME): str,
        vol.Required(CONF_DIMENSION): vol.All(int, vol.Range(min=1)),
        vol.Required(CONF_RADII): [vol.All(_NUMBER, vol.Range(min=0))],
        vol.Required(CONF_INITIAL): [[_NUMBER]],
        vol.Required(CONF_GOAL): [[_NUMBER]],
        vol.Optional(CONF_GOAL_TREE): vol.Any(None, str),
        vol.Optional(CONF_ALPHA, default=DEFAULT_ALPHA): _POSITIVE,
        vol.Optional(CONF_BETA, default=DEFAULT_BETA): _POSITIVE,
        vol.Optional(CONF_DT, default=DEFAULT_DT): _POSITIVE,
        vol.Optional(CONF_T_MAX, default=DEFAULT_T_MAX): _POSITIVE,
        vol.Optional(CONF_GOAL_TOL): vol.Any(None, _POSITIVE),
        vol.Optional(CONF_PERTURB_SEED): vol.Any(None, vol.All(int, vol.Range(min=0))),
    }
)


def _schema_errors(err: vol.MultipleInvalid) -> ScenarioError:
    errors: dict[str, str] = {}
    details: dict[str, str] = {}
    for error in err.errors:
        field = str(error.path[0]) if error.path else "base"
        if isinstance(error, vol.RequiredFieldInvalid):
            key = "required"
        elif error.error_message == "extra keys not allowed":
            key = "unknown_field"
        else:
            key = "invalid_value"
        errors.setdefault(field, key)
        details.setdefault(field, str(error))
    return ScenarioError(errors, details)


def _configuration(
    rows: list[list[float]], radii: list[float], dimension: int, field: str
) -> Configuration:
    if len(rows) != len(radii):
        raise ScenarioError(
            {field: "length_mismatch"},
            {field: f"{len(rows)} positions for {len(radii)} radii"},
        )
    if bad := [label for label, row in enumerate(rows, 1) if len(row) != dimension]:
        raise ScenarioError(
            {field: "dimension_mismatch"},
            {field: f"disks {bad} do not have {dimension} coordinates"},
        )
    config = Configuration(rows, radii)
    if violations := validate(config):
        raise ScenarioError(
            {field: "collision"},
            {
                field: ", ".join(
                    f"disks {violation.first} and {violation.second} "
                    f"(gap {violation.gap:.6g})"
                    for violation in violations
                )
            },
        )
    return config


def _goal_tree(text: str, goal: Configuration) -> BinaryHierarchy:
    try:
        tree = BinaryHierarchy.from_newick(text)
    except TreeParseError as err:
        raise ScenarioError({CONF_GOAL_TREE: "invalid_tree"}, {CONF_GOAL_TREE: str(err)}) from err
    if tree.n != goal.n:
        raise ScenarioError(
            {CONF_GOAL_TREE: "invalid_tree"},
            {CONF_GOAL_TREE: f"{tree.n} leaves for {goal.n} disks"},
        )
    if not stratum_contains(StratumQuery(config=goal, tree=tree, mode=StratumMode.CLOSED)):
        raise ScenarioError(
            {CONF_GOAL_TREE: "goal_tree_unsupported"}, {CONF_GOAL_TREE: str(tree)}
        )
    return tree


@dataclass(frozen=True, kw_only=True)
class Scenario:
    """A validated navigation problem with its integration settings."""

    initial: Configuration
    goal: Configuration
    goal_tree: BinaryHierarchy | None = None
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    dt: float = DEFAULT_DT
    t_max: float = DEFAULT_T_MAX
    goal_tol: float | None = None
    perturb_seed: int | None = None
    name: str = "scenario"

    @property
    def n(self) -> int:
        """Return the number of disks."""
        return self.initial.n

    @property
    def dimension(self) -> int:
        """Return the dimension of the workspace."""
        return self.initial.dimension

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], name: str | None = None) -> Self:
        """Validate raw scenario data and construct the scenario."""
        try:
            conf = SCENARIO_SCHEMA(dict(data))
        except vol.MultipleInvalid as err:
            raise _schema_errors(err) from err
        radii = conf[CONF_RADII]
        if len(radii) < 2:
            raise ScenarioError(
                {CONF_RADII: "too_few_disks"}, {CONF_RADII: f"{len(radii)} disks"}
            )
        initial = _configuration(conf[CONF_INITIAL], radii, conf[CONF_DIMENSION], CONF_INITIAL)
        goal = _configuration(conf[CONF_GOAL], radii, conf[CONF_DIMENSION], CONF_GOAL)
        if not conf[CONF_BETA] > conf[CONF_ALPHA]:
            raise ScenarioError(
                {CONF_BETA: "beta_not_above_alpha"},
                {CONF_BETA: f"{conf[CONF_BETA]} <= {conf[CONF_ALPHA]}"},
            )
        goal_tree = None
        if (text := conf.get(CONF_GOAL_TREE)) is not None:
            goal_tree = _goal_tree(text, goal)
        return cls(
            initial=initial,
            goal=goal,
            goal_tree=goal_tree,
            alpha=conf[CONF_ALPHA],
            beta=conf[CONF_BETA],
            dt=conf[CONF_DT],
            t_max=conf[CONF_T_MAX],
            goal_tol=conf.get(CONF_GOAL_TOL),
            perturb_seed=conf.get(CONF_PERTURB_SEED),
            name=name or conf.get(CONF_NAME) or "scenario",
        )

    @classmethod
    def from_file(cls, path: Path) -> Self:
        """Read and validate a JSON scenario file."""
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as err:
            raise ScenarioError({"base": "cannot_read"}, {"base": str(err)}) from err
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ScenarioError({"base": "invalid_json"}, {"base": str(err)}) from err
        if not isinstance(data, dict):
            raise ScenarioError({"base": "invalid_json"}, {"base": "expected an object"})
        return cls.from_dict(data, name=path.stem)

    def with_overrides(
        self, *, dt: float | None = None, perturb_seed: int | None = None
    ) -> Self:
        """Return the scenario with command line overrides applied."""
        changes: dict[str, Any] = {}
        if dt is not None:
            if not dt > 0:
                raise ScenarioError({CONF_DT: "invalid_value"}, {CONF_DT: str(dt)})
            changes[CONF_DT] = dt
        if perturb_seed is not None:
            changes[CONF_PERTURB_SEED] = perturb_seed
        return replace(self, **changes)


def validate_scenario(data: Mapping[str, Any]) -> dict[str, str]:
    """
    Validate raw scenario data.

    Returns a dictionary mapping each offending field (or base) to an error key
    of the translation table, empty when the scenario is valid.
    """
    try:
        Scenario.from_dict(data)
    except ScenarioError as err:
        return err.errors
    except Exception:  # noqa: BLE001
        LOGGER.exception("Unexpected exception")
        return {"base": "unknown"}
    else:
        return {}


@cache
def load_translations() -> dict[str, Any]:
    """Return the string table for user-facing messages."""
    return json.loads(TRANSLATIONS_PATH.read_text(encoding="utf-8"))


def error_messages(err: ScenarioError) -> list[str]:
    """Return one translated line per offending field."""
    strings = load_translations()["scenario"]
    lines = []
    for field, key in err.errors.items():
        label = strings["data"].get(field, field)
        message = strings["error"].get(key, key)
        if detail := err.details.get(field):
            lines.append(f"{label}: {message} ({detail})")
        else:
            lines.append(f"{label}: {message}")
    return lines


def outcome_message(outcome: str) -> str:
    """Return the translated description of a run outcome."""
    return load_translations()["outcome"].get(outcome, outcome)

"""Hybrid executor running the hierarchical navigation control loop."""

from __future__ import annotations

import asyncio
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import IntEnum, StrEnum
from functools import partial
import time
from typing import TYPE_CHECKING, Any

import numpy as np

from .clustering import StratumMode, StratumQuery, hc_2means, stratum_contains, stratum_margin
from .configuration import Configuration, min_clearance
from .const import (
    EPS_GEOM,
    EXIT_GOAL_REACHED,
    EXIT_STALL,
    EXIT_TIMEOUT,
    GOAL_TOL_FACTOR,
    LOGGER,
    PERTURBATION_FACTOR,
    STALL_SPEED_FACTOR,
    STALL_STEPS,
)
from .exceptions import DegenerateHyperplaneError, IntegrationError
from .field import FieldParams, HierarchyField
from .hierarchy import nni_control, nni_move
from .portal import PortalContext, portal_map

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy.typing as npt

    from .configuration import Points
    from .hierarchy import BinaryHierarchy
    from .scenario import Scenario


class ExecutorMode(StrEnum):
    """Mode of the hybrid automaton."""

    GOAL_STRATUM = "goal_stratum"
    TRANSIT = "transit"


class EventKind(StrEnum):
    """Kind of a trace event."""

    START = "start"
    TREE_TRANSITION = "tree_transition"
    ENTERED_GOAL_STRATUM = "entered_goal_stratum"
    GOAL_REACHED = "goal_reached"
    STALL = "stall"
    STEP = "step"
    TIMEOUT = "timeout"


class RunOutcome(IntEnum):
    """Terminal outcome of a run, valued by its exit code."""

    GOAL_REACHED = EXIT_GOAL_REACHED
    STALL = EXIT_STALL
    TIMEOUT = EXIT_TIMEOUT


@dataclass(frozen=True, kw_only=True)
class TraceEvent:
    """One entry of the append-only event log of a run."""

    t: float
    kind: EventKind
    from_tree: BinaryHierarchy | None = None
    to_tree: BinaryHierarchy | None = None
    local_goal: Points | None = None

    def as_dict(self) -> dict[str, Any]:
        """Return the JSON representation of the event."""
        return {
            "t": self.t,
            "kind": str(self.kind),
            "from_tree": None if self.from_tree is None else self.from_tree.to_newick(),
            "to_tree": None if self.to_tree is None else self.to_tree.to_newick(),
            "local_goal": None if self.local_goal is None else self.local_goal.tolist(),
        }


@dataclass(frozen=True, kw_only=True)
class HybridState:
    """
    State of the hybrid automaton.

    params holds the active tree and local goal: the final goal in goal stratum
    mode, a portal configuration toward next_tree in transit mode.
    """

    t: float
    x: Configuration
    params: FieldParams
    mode: ExecutorMode
    next_tree: BinaryHierarchy | None = None

    @property
    def tree(self) -> BinaryHierarchy:
        """Return the tree whose stratum the state is confined to."""
        return self.params.tree

    @property
    def local_goal(self) -> Configuration:
        """Return the goal of the active field."""
        return self.params.goal


@dataclass(frozen=True, kw_only=True)
class RunStats:
    """Summary statistics of a run."""

    deployed_trees: int
    transitions: int
    min_clearance: float
    final_error: float
    steps: int
    wall_ms: float

    def as_dict(self) -> dict[str, Any]:
        """Return the JSON representation of the statistics."""
        return {
            "deployed_trees": self.deployed_trees,
            "transitions": self.transitions,
            "min_clearance": self.min_clearance,
            "final_error": self.final_error,
            "steps": self.steps,
            "wall_ms": self.wall_ms,
        }


@dataclass(frozen=True, kw_only=True)
class RunResult:
    """Trajectory rows, event log, statistics and outcome of one run."""

    trajectory: npt.NDArray[np.float64]
    events: list[TraceEvent]
    stats: RunStats
    outcome: RunOutcome

    @property
    def exit_code(self) -> int:
        """Return the process exit code of the outcome."""
        return int(self.outcome)


def _velocity(params: FieldParams, points: Points) -> Points:
    # Intermediate RK4 stages may sit just outside the closed stratum.
    return HierarchyField(params, points, check_stratum=False).evaluate()


def _rk4(params: FieldParams, points: Points, dt: float) -> tuple[Points, Points]:
    k1 = _velocity(params, points)
    k2 = _velocity(params, points + dt / 2 * k1)
    k3 = _velocity(params, points + dt / 2 * k2)
    k4 = _velocity(params, points + dt * k3)
    return points + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4), k1


def _advance(state: HybridState, dt: float) -> tuple[HybridState, float]:
    """Take one RK4 step and return the new state with the speed at the old one."""
    try:
        positions, velocity = _rk4(state.params, state.x.positions, dt)
        x = state.x.with_positions(positions)
        supported = stratum_contains(
            StratumQuery(config=x, tree=state.tree, mode=StratumMode.CLOSED)
        )
    except DegenerateHyperplaneError as err:
        raise IntegrationError(f"t={state.t + dt}: {err}") from err
    if not supported:
        raise IntegrationError(
            f"t={state.t + dt}: left the stratum of {state.tree}, "
            f"margin {stratum_margin(x, state.tree)}"
        )
    if (clearance := min_clearance(x)) <= -EPS_GEOM:
        raise IntegrationError(f"t={state.t + dt}: disks overlap by {-clearance}")
    return replace(state, t=state.t + dt, x=x), float(np.linalg.norm(velocity))


def step(state: HybridState, dt: float) -> HybridState:
    """Integrate the active field over one fixed RK4 step and check the result."""
    new_state, _ = _advance(state, dt)
    return new_state


def _in_interior(x: Configuration, tree: BinaryHierarchy) -> bool:
    return stratum_contains(StratumQuery(config=x, tree=tree, mode=StratumMode.INTERIOR))


class HncExecutor:
    """Run one scenario through the hybrid automaton."""

    def __init__(
        self, scenario: Scenario, *, stride: int = 1, step_events: int = 0
    ) -> None:
        """Initialize the executor."""
        self.scenario = scenario
        self.stride = max(stride, 1)
        self.step_events = step_events
        self.goal = scenario.goal
        self.goal_tree = scenario.goal_tree or hc_2means(scenario.goal)
        self.goal_tol = scenario.goal_tol or (
            GOAL_TOL_FACTOR * self.goal.diameter or GOAL_TOL_FACTOR
        )
        self.scale = max(scenario.initial.diameter, self.goal.diameter) or 1.0
        self.events: list[TraceEvent] = []
        self._rows: list[npt.NDArray[np.float64]] = []
        self._deployed: set[BinaryHierarchy] = set()
        self._rng = (
            None
            if scenario.perturb_seed is None
            else np.random.default_rng(scenario.perturb_seed)
        )

    def _emit(self, t: float, kind: EventKind, **kwargs: Any) -> None:
        self.events.append(TraceEvent(t=t, kind=kind, **kwargs))

    def _record(self, state: HybridState) -> None:
        self._rows.append(np.concatenate(([state.t], state.x.positions.ravel())))

    def _params(self, goal: Configuration, tree: BinaryHierarchy) -> FieldParams:
        self._deployed.add(tree)
        return FieldParams(
            goal=goal, tree=tree, alpha=self.scenario.alpha, beta=self.scenario.beta
        )

    def _enter_goal_stratum(self, t: float, x: Configuration, tree: BinaryHierarchy) -> HybridState:
        if tree != self.goal_tree:
            self._transition(t, tree, self.goal_tree)
        self._emit(
            t,
            EventKind.ENTERED_GOAL_STRATUM,
            to_tree=self.goal_tree,
            local_goal=self.goal.positions,
        )
        return HybridState(
            t=t,
            x=x,
            params=self._params(self.goal, self.goal_tree),
            mode=ExecutorMode.GOAL_STRATUM,
        )

    def _start_transit(self, t: float, x: Configuration, tree: BinaryHierarchy) -> HybridState:
        next_tree = nni_move(tree, nni_control(tree, self.goal_tree))
        portal = portal_map(
            x, PortalContext.from_trees(tree, next_tree, self.scenario.alpha)
        )
        LOGGER.debug("Transit from %s toward %s", tree, next_tree)
        return HybridState(
            t=t,
            x=x,
            params=self._params(portal, tree),
            mode=ExecutorMode.TRANSIT,
            next_tree=next_tree,
        )

    def _transition(self, t: float, source: BinaryHierarchy, target: BinaryHierarchy) -> None:
        LOGGER.info("t=%.4f: tree transition %s -> %s", t, source, target)
        self._emit(t, EventKind.TREE_TRANSITION, from_tree=source, to_tree=target)

    def _switch(self, state: HybridState) -> HybridState:
        """Apply the mode switching guards after a step."""
        if state.mode is ExecutorMode.GOAL_STRATUM:
            return state
        if _in_interior(state.x, self.goal_tree):
            return self._enter_goal_stratum(state.t, state.x, state.tree)
        if state.next_tree is not None and _in_interior(state.x, state.next_tree):
            self._transition(state.t, state.tree, state.next_tree)
            return self._start_transit(state.t, state.x, state.next_tree)
        return state

    def _error(self, state: HybridState) -> float:
        return float(np.linalg.norm(state.x.positions - self.goal.positions))

    def _initial_state(self) -> HybridState:
        x = self.scenario.initial
        tree = hc_2means(x)
        LOGGER.info("Starting in %s, goal tree %s", tree, self.goal_tree)
        self._emit(0.0, EventKind.START, to_tree=tree, local_goal=self.goal.positions)
        if tree == self.goal_tree or _in_interior(x, self.goal_tree):
            return self._enter_goal_stratum(0.0, x, tree)
        return self._start_transit(0.0, x, tree)

    def run(self) -> RunResult:
        """Run the hybrid loop until the goal is reached, a stall or a timeout."""
        started = time.perf_counter()
        dt, t_max = self.scenario.dt, self.scenario.t_max
        state = self._initial_state()
        self._record(state)
        clearance = min_clearance(state.x)
        steps = slow_steps = 0
        outcome: RunOutcome
        while True:
            if state.mode is ExecutorMode.GOAL_STRATUM and self._error(state) <= self.goal_tol:
                LOGGER.info("t=%.4f: goal reached after %d steps", state.t, steps)
                self._emit(state.t, EventKind.GOAL_REACHED, to_tree=state.tree)
                outcome = RunOutcome.GOAL_REACHED
                break
            if state.t > t_max:
                LOGGER.warning("t=%.4f: timeout with error %s", state.t, self._error(state))
                self._emit(state.t, EventKind.TIMEOUT, to_tree=state.tree)
                outcome = RunOutcome.TIMEOUT
                break
            state, speed = _advance(state, dt)
            steps += 1
            clearance = min(clearance, min_clearance(state.x))
            if steps % self.stride == 0:
                self._record(state)
            if self.step_events and steps % self.step_events == 0:
                self._emit(
                    state.t,
                    EventKind.STEP,
                    to_tree=state.tree,
                    local_goal=state.local_goal.positions,
                )
            slow_steps = slow_steps + 1 if speed < STALL_SPEED_FACTOR * self.scale else 0
            if slow_steps >= STALL_STEPS:
                if (rng := self._rng) is not None:
                    state = self._perturb(state, rng)
                    slow_steps = 0
                else:
                    LOGGER.warning("t=%.4f: stalled in %s", state.t, state.tree)
                    self._emit(
                        state.t,
                        EventKind.STALL,
                        to_tree=state.tree,
                        local_goal=state.local_goal.positions,
                    )
                    outcome = RunOutcome.STALL
                    break
            state = self._switch(state)
        if steps % self.stride:
            self._record(state)
        stats = RunStats(
            deployed_trees=len(self._deployed),
            transitions=sum(
                event.kind is EventKind.TREE_TRANSITION for event in self.events
            ),
            min_clearance=clearance,
            final_error=self._error(state),
            steps=steps,
            wall_ms=round((time.perf_counter() - started) * 1000, 3),
        )
        return RunResult(
            trajectory=np.array(self._rows),
            events=self.events,
            stats=stats,
            outcome=outcome,
        )

    def _perturb(self, state: HybridState, rng: np.random.Generator) -> HybridState:
        """Apply the one-shot random kick and drop the generator."""
        kick = rng.standard_normal(state.x.positions.shape)
        kick *= PERTURBATION_FACTOR * self.scale / max(float(np.linalg.norm(kick)), EPS_GEOM)
        self._rng = None
        LOGGER.warning("t=%.4f: stalled in %s, applying a random kick", state.t, state.tree)
        return replace(state, x=state.x.with_positions(state.x.positions + kick))


def run_hnc(scenario: Scenario, *, stride: int = 1, step_events: int = 0) -> RunResult:
    """Run the hybrid navigation loop on a scenario."""
    return HncExecutor(scenario, stride=stride, step_events=step_events).run()


async def async_run_batch(
    scenarios: Sequence[Scenario],
    jobs: int = 1,
    *,
    stride: int = 1,
    step_events: int = 0,
) -> list[RunResult | BaseException]:
    """Run independent scenarios in a process pool, one result or error each."""
    loop = asyncio.get_running_loop()
    runner = partial(run_hnc, stride=stride, step_events=step_events)
    with ProcessPoolExecutor(max_workers=max(jobs, 1)) as pool:
        return await asyncio.gather(
            *(loop.run_in_executor(pool, runner, scenario) for scenario in scenarios),
            return_exceptions=True,
        )

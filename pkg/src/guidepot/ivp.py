"""Selection-based explicit-Euler integration of differential inclusions.

A trajectory stores the node states together with the per-interval
selections actually used, so that two certificates can be re-checked after
the fact: the Euler consistency x_{k+1} = x_k + dt_k f_k (exact by
construction) and the membership of every selection in the set value at its
evaluation node.  Selection strategies are small frozen configuration
objects; the ones backed by a potential (extremal along the gradient,
filtered, homotopy) are what the solvers use.

Explicit Euler with left-node selections is used on purpose: selections of a
multimap are in general discontinuous, higher-order schemes gain nothing,
and the first-order scheme keeps the membership certificate exact at nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bounds as _bounds
from .convexset import as_vector
from .errors import ConfigError, DivergenceError, DomainError, GuidingViolationError
from .multimap import (
    FILTER_TOL,
    LinearBall,
    MultiMap,
    Relay,
    select_extremal,
    select_filtered,
)

__all__ = [
    "TimeGrid",
    "SampledPath",
    "Trajectory",
    "CenterSelection",
    "RandomSelection",
    "ExtremalSelection",
    "FilteredSelection",
    "HomotopySelection",
    "integrate",
    "sample_solution_set",
    "envelope_check",
    "EnvelopeDiagnostics",
]

#: selections must sit within this distance of the set value at their node
MEMBERSHIP_TOL = 1e-10


class TimeGrid:
    """Node set 0 = t_0 < ... < t_n = T, uniform except for inserted times."""

    def __init__(self, nodes):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.shape[0] < 2:
            raise ValueError("need at least two grid nodes")
        if nodes[0] != 0.0 or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must start at 0 and increase strictly")
        self.nodes = nodes

    @classmethod
    def uniform(cls, horizon: float, n: int, include=()) -> "TimeGrid":
        """n uniform steps on [0, horizon], refined to contain each time in
        ``include`` exactly."""
        if n < 1:
            raise ValueError("need at least one step")
        if horizon <= 0:
            raise ValueError("horizon must be positive")
        nodes = list(np.linspace(0.0, float(horizon), n + 1))
        tol = 1e-9 * horizon / n
        for t in sorted(set(float(t) for t in include)):
            if not 0.0 <= t <= horizon:
                raise ValueError(f"required time {t} outside [0, {horizon}]")
            pos = int(np.searchsorted(nodes, t))
            if pos < len(nodes) and abs(nodes[pos] - t) <= tol:
                if 0 < pos < len(nodes) - 1:
                    nodes[pos] = t
            elif pos > 0 and abs(nodes[pos - 1] - t) <= tol:
                if 0 < pos - 1 < len(nodes) - 1:
                    nodes[pos - 1] = t
            else:
                nodes.insert(pos, t)
        return cls(np.asarray(nodes))

    @property
    def horizon(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_steps(self) -> int:
        return self.nodes.shape[0] - 1

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def max_step(self) -> float:
        return float(np.max(self.steps))

    def index_of(self, t: float) -> int:
        """Index of the node equal to t; raises if the grid does not contain it."""
        pos = int(np.searchsorted(self.nodes, t))
        for k in (pos - 1, pos, pos + 1):
            if 0 <= k < self.nodes.shape[0] and abs(self.nodes[k] - t) <= 1e-12 * max(
                1.0, self.horizon
            ):
                return k
        raise DomainError(f"grid does not contain the required time {t}")

    def __eq__(self, other) -> bool:
        return isinstance(other, TimeGrid) and np.array_equal(self.nodes, other.nodes)


@dataclass(frozen=True)
class SampledPath:
    """A bare continuous path sampled on a grid (no dynamics attached)."""

    grid: TimeGrid
    states: np.ndarray

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if states.shape[0] != self.grid.nodes.shape[0]:
            raise ValueError("need one state per grid node")
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def x0(self) -> np.ndarray:
        return self.states[0]

    @property
    def xT(self) -> np.ndarray:
        return self.states[-1]

    def sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.states, axis=1)))

    def state_at(self, t: float) -> np.ndarray:
        return self.states[self.grid.index_of(t)]


@dataclass(frozen=True)
class Trajectory(SampledPath):
    """Euler path plus the selections that generated it.

    ``selection_node`` records at which interval endpoint each selection was
    evaluated ("left" for forward integration, "right" for time-reversed
    solves); ``projected`` flags sliding steps, whose selections belong to
    the convexified value at the attained switching point.
    """

    selections: np.ndarray = None
    selection_node: str = "left"
    projected: np.ndarray | None = None

    def __post_init__(self):
        super().__post_init__()
        sel = np.atleast_2d(np.asarray(self.selections, dtype=float))
        if sel.shape != (self.grid.n_steps, self.dim):
            raise ValueError("need one selection per grid interval")
        object.__setattr__(self, "selections", sel)
        if self.selection_node not in ("left", "right"):
            raise ValueError("selection_node must be 'left' or 'right'")
        if self.projected is not None:
            proj = np.asarray(self.projected, dtype=bool)
            if proj.shape != (self.grid.n_steps,):
                raise ValueError("need one sliding flag per interval")
            object.__setattr__(self, "projected", proj)

    def euler_defect(self) -> float:
        """Max deviation from x_{k+1} = x_k + dt_k f_k; 0 by construction."""
        steps = self.grid.steps[:, None] * self.selections
        return float(np.max(np.abs(self.states[1:] - self.states[:-1] - steps)))

    def membership_defect(self, F: MultiMap) -> float:
        """Max distance of each selection from the set value at its node."""
        worst = 0.0
        n = self.grid.n_steps
        for k in range(n):
            if self.projected is not None and self.projected[k]:
                t, x = self.grid.nodes[k], self.states[k + 1]
            elif self.selection_node == "left":
                t, x = self.grid.nodes[k], self.states[k]
            else:
                t, x = self.grid.nodes[k + 1], self.states[k + 1]
            d = F.value(float(t), x).distance_to(self.selections[k])
            if d > worst:
                worst = d
        return worst


@dataclass(frozen=True)
class CenterSelection:
    """Centroid of the set value (ball center, vertex mean)."""


@dataclass(frozen=True)
class RandomSelection:
    """Extremal element in a random direction redrawn each step."""

    seed: int = 0


@dataclass(frozen=True)
class ExtremalSelection:
    """Extremal element along a fixed direction or the potential gradient."""

    mode: str
    direction: tuple | None = None
    potential: object = None

    def __post_init__(self):
        if self.mode not in ("min", "max"):
            raise ValueError("mode must be 'min' or 'max'")
        if (self.direction is None) == (self.potential is None):
            raise ValueError("give exactly one of direction or potential")
        if self.direction is not None:
            object.__setattr__(self, "direction", tuple(float(c) for c in self.direction))


@dataclass(frozen=True)
class FilteredSelection:
    """Gradient-filtered extremal selection; empty filter aborts integration."""

    potential: object
    sign: int
    radius: float

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        if self.radius <= 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class HomotopySelection:
    """lam * (sign * truncated gradient) + (1 - lam) * filtered selection."""

    potential: object
    sign: int
    radius: float
    lam: float

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")


def _linear_ball_nodes(F: LinearBall, grid: TimeGrid):
    times = grid.nodes[:-1]
    b = F.b.at_times(times)
    if b.ndim == 1:
        b = np.repeat(b[None, :], times.shape[0], axis=0)
    rho = np.asarray(F.rho.at_times(times), dtype=float).reshape(-1)
    return b, rho


def _build_selector(F: MultiMap, grid: TimeGrid, strategy):
    """Return f(k, t, x) -> selection vector (or None for an empty filter)."""
    fast = isinstance(F, LinearBall)
    if fast:
        A = F.A
        b_nodes, rho_nodes = _linear_ball_nodes(F, grid)

    if isinstance(strategy, CenterSelection):
        if fast:
            return lambda k, t, x: A @ x + b_nodes[k]
        return lambda k, t, x: F.value(t, x).centroid()

    if isinstance(strategy, RandomSelection):
        rng = np.random.default_rng(strategy.seed)
        dirs = rng.standard_normal((grid.n_steps, F.dim))
        if fast:

            def sel(k, t, x):
                d = dirs[k]
                nd = np.linalg.norm(d)
                c = A @ x + b_nodes[k]
                return c if nd == 0.0 else c + (rho_nodes[k] / nd) * d

            return sel
        return lambda k, t, x: F.value(t, x).extreme_point(dirs[k])

    if isinstance(strategy, ExtremalSelection):
        orient = 1.0 if strategy.mode == "max" else -1.0
        if strategy.direction is not None:
            d_fixed = np.asarray(strategy.direction, dtype=float)

            def direction_of(x):
                return d_fixed

        else:
            pot = strategy.potential

            def direction_of(x):
                return pot.grad(x)

        if fast:

            def sel(k, t, x):
                d = orient * direction_of(x)
                nd = np.linalg.norm(d)
                c = A @ x + b_nodes[k]
                return c if nd == 0.0 else c + (rho_nodes[k] / nd) * d

            return sel
        return lambda k, t, x: select_extremal(F, t, x, direction_of(x), strategy.mode)

    if isinstance(strategy, (FilteredSelection, HomotopySelection)):
        pot = strategy.potential
        sign = strategy.sign
        R = strategy.radius
        lam = strategy.lam if isinstance(strategy, HomotopySelection) else None

        if fast:

            def filtered(k, t, x):
                g = pot.grad(x)
                ng = np.linalg.norm(g)
                c = A @ x + b_nodes[k]
                y = c if ng == 0.0 else c + (sign * rho_nodes[k] / ng) * g
                if x @ x <= R * R:
                    return y
                if sign * float(g @ y) >= -FILTER_TOL:
                    return y
                return None

        else:

            def filtered(k, t, x):
                return select_filtered(F, pot, t, x, sign, R)

        if lam is None:
            return filtered

        def sel(k, t, x):
            y = filtered(k, t, x)
            if y is None:
                return None
            w = pot.truncated_gradient(x)
            return lam * (sign * w) + (1.0 - lam) * y

        return sel

    raise ConfigError(f"unknown selection strategy {strategy!r}")


def integrate(F: MultiMap, x0, grid: TimeGrid, strategy) -> Trajectory:
    """Explicit-Euler trajectory of the inclusion under the given strategy.

    Raises GuidingViolationError when a filtered selection comes up empty
    and DivergenceError when the state leaves the finite range.  Relay
    crossings of the switching point project onto it (Filippov sliding) and
    are flagged in the result.
    """
    if abs(grid.horizon - F.horizon) > 1e-12 * max(1.0, F.horizon):
        raise ConfigError("grid horizon disagrees with the multimap horizon")
    x = as_vector(x0, F.dim).copy()
    selector = _build_selector(F, grid, strategy)
    nodes = grid.nodes
    n = grid.n_steps
    states = np.empty((n + 1, F.dim))
    selections = np.empty((n, F.dim))
    states[0] = x
    sliding = isinstance(F, Relay)
    projected = np.zeros(n, dtype=bool) if sliding else None
    lam = strategy.lam if isinstance(strategy, HomotopySelection) else None
    for k in range(n):
        t = float(nodes[k])
        dt = float(nodes[k + 1] - nodes[k])
        y = selector(k, t, x)
        if y is None:
            raise GuidingViolationError(t, x.copy(), lam=lam)
        x_next = x + dt * y
        if sliding and x[0] != 0.0 and x_next[0] != 0.0 and np.sign(x_next[0]) != np.sign(x[0]):
            # crossing the switching point with 0 in F(t, 0): slide instead
            y = -x / dt
            x_next = np.zeros_like(x)
            projected[k] = True
        if not np.all(np.isfinite(x_next)):
            raise DivergenceError(f"state became non-finite at t={nodes[k + 1]}")
        selections[k] = y
        states[k + 1] = x_next
        x = x_next
    return Trajectory(grid=grid, states=states, selections=selections, projected=projected)


def sample_solution_set(
    F: MultiMap,
    x0,
    grid: TimeGrid,
    strategies=(),
    bundle_size: int = 1,
    seed: int = 0,
    potential=None,
) -> list[Trajectory]:
    """A finite bundle of trajectories from one initial point.

    The bundle always contains the supplied strategies first; when a
    potential is given, the centroid and both gradient-extremal strategies
    are ensured; remaining slots are filled with seeded random selections.
    """
    if bundle_size < 1:
        raise ValueError("bundle_size must be at least 1")
    pool = list(strategies)
    if potential is not None:
        defaults = [
            CenterSelection(),
            ExtremalSelection(mode="max", potential=potential),
            ExtremalSelection(mode="min", potential=potential),
        ]
        for s in defaults:
            if s not in pool:
                pool.append(s)
    i = 0
    while len(pool) < bundle_size:
        pool.append(RandomSelection(seed=seed + i))
        i += 1
    return [integrate(F, x0, grid, s) for s in pool[:bundle_size]]


@dataclass(frozen=True)
class EnvelopeDiagnostics:
    """Worst-case excess over the growth envelopes (negative means inside)."""

    upper_violation: float
    lower_violation: float
    slack: float
    mu_total: float
    max_step: float

    @property
    def within(self) -> bool:
        return self.upper_violation <= 0.0 and self.lower_violation <= 0.0

    def to_mapping(self) -> dict:
        return {
            "upper_violation": self.upper_violation,
            "lower_violation": self.lower_violation,
            "slack": self.slack,
            "mu_total": self.mu_total,
            "max_step": self.max_step,
            "within": self.within,
        }


def envelope_check(traj: Trajectory, growth) -> EnvelopeDiagnostics:
    """Compare |x_k| against the integrated growth envelopes with Euler slack.

    The discretization slack per node is C dt with
    C = (1 + upper_envelope(|x0|)) * sup mu, which dominates the one-step
    consistency error of the scheme under the growth bound.
    """
    x0n = float(np.linalg.norm(traj.x0))
    prefix = growth.integral_prefix(traj.grid.nodes)
    norms = np.linalg.norm(traj.states, axis=1)
    C = (1.0 + _bounds.gronwall_upper(x0n, growth.mu_total)) * growth.mu_sup
    slack = C * traj.grid.max_step
    upper = (x0n + 1.0) * np.exp(prefix) - 1.0 + slack
    lower = (x0n + 1.0) * np.exp(-prefix) - 1.0 - slack
    return EnvelopeDiagnostics(
        upper_violation=float(np.max(norms - upper)),
        lower_violation=float(np.max(lower - norms)),
        slack=slack,
        mu_total=growth.mu_total,
        max_step=traj.grid.max_step,
    )

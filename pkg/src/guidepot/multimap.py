"""Set-valued right-hand sides F(t, x) with affine growth control.

Three families are built in:

* ``LinearBall``:  F(t, x) = A x + b(t) + Ball(0, rho(t)), with piecewise
  constant b and rho so that all time integrals are exact;
* ``AffineHull``:  F(t, x) = conv { A_j x + b_j };
* ``Relay`` (scalar state only):  F(t, x) = {-k sgn x} away from 0 and the
  full interval [-k, k] at 0, i.e. the convexified relay.

Each family knows how to derive a growth profile mu with
sup{|y| : y in F(t,x)} <= mu(t) (1 + |x|), how to hand out extremal
selections, and how to filter selections against a potential gradient
(returning ``None`` when the filtered set is empty, which doubles as a
runtime monitor for the guiding hypothesis).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .convexset import Ball, ConvexSet, Polytope, as_vector
from .errors import ConfigError, DomainError

__all__ = [
    "PiecewiseConstant",
    "GrowthProfile",
    "MultiMap",
    "LinearBall",
    "AffineHull",
    "Relay",
    "HomotopyField",
    "select_extremal",
    "select_filtered",
    "homotopy_value",
    "FILTER_TOL",
]

#: slack absorbed when testing the sign of a filtered selection
FILTER_TOL = 1e-10


class PiecewiseConstant:
    """Right-continuous piecewise-constant data on [0, T].

    ``breakpoints`` has K+1 entries starting at 0 and ending at T; piece k
    holds ``values[k]`` on [breakpoints[k], breakpoints[k+1]).  The value at
    T is the last piece's.  Values may be scalars or vectors.
    """

    def __init__(self, breakpoints, values):
        self.breakpoints = np.asarray(breakpoints, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.breakpoints.ndim != 1 or self.breakpoints.shape[0] < 2:
            raise ValueError("need at least two breakpoints")
        if np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if self.values.shape[0] != self.breakpoints.shape[0] - 1:
            raise ValueError("need exactly one value per piece")

    @classmethod
    def constant(cls, value, horizon: float) -> "PiecewiseConstant":
        return cls([0.0, float(horizon)], [value])

    @property
    def horizon(self) -> float:
        return float(self.breakpoints[-1])

    def piece_index(self, t: float) -> int:
        k = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        return min(max(k, 0), self.values.shape[0] - 1)

    def value_at(self, t: float):
        return self.values[self.piece_index(t)]

    def at_times(self, times) -> np.ndarray:
        idx = np.minimum(
            np.maximum(np.searchsorted(self.breakpoints, times, side="right") - 1, 0),
            self.values.shape[0] - 1,
        )
        return self.values[idx]

    def integral_to(self, t: float):
        """Exact integral over [0, t] (scalar pieces only)."""
        upper = np.minimum(self.breakpoints[1:], t)
        lower = self.breakpoints[:-1]
        widths = np.clip(upper - lower, 0.0, None)
        return float(widths @ self.values)

    def integral_prefix(self, times) -> np.ndarray:
        """Exact integral over [0, t] for each t in `times` (scalar pieces)."""
        times = np.asarray(times, dtype=float)
        widths = np.diff(self.breakpoints)
        cums = np.concatenate([[0.0], np.cumsum(widths * self.values)])
        idx = np.clip(
            np.searchsorted(self.breakpoints, times, side="right") - 1,
            0,
            self.values.shape[0] - 1,
        )
        return cums[idx] + self.values[idx] * (times - self.breakpoints[idx])

    def total_integral(self):
        widths = np.diff(self.breakpoints)
        return widths @ self.values

    def reversed(self) -> "PiecewiseConstant":
        """Data for s -> value(T - s); exact integrals are preserved."""
        T = self.horizon
        return PiecewiseConstant(T - self.breakpoints[::-1], self.values[::-1])


@dataclass(frozen=True)
class GrowthProfile:
    """Nonnegative integrable envelope mu for the affine growth bound."""

    mu: PiecewiseConstant
    mu_total: float = field(init=False)
    mu_sup: float = field(init=False)

    def __post_init__(self):
        if np.any(self.mu.values < 0):
            raise ValueError("growth rate must be nonnegative")
        object.__setattr__(self, "mu_total", float(self.mu.total_integral()))
        object.__setattr__(self, "mu_sup", float(np.max(self.mu.values)))

    def value_at(self, t: float) -> float:
        return float(self.mu.value_at(t))

    def integral_to(self, t: float) -> float:
        return self.mu.integral_to(t)

    def integral_prefix(self, times) -> np.ndarray:
        return self.mu.integral_prefix(times)


class MultiMap:
    """Base class: a Caratheodory set-valued map on [0, T] x R^N."""

    dim: int
    horizon: float

    def value(self, t: float, x) -> ConvexSet:
        raise NotImplementedError

    def derive_growth(self) -> GrowthProfile:
        raise NotImplementedError

    def reversed(self) -> "MultiMap":
        """The map for the time-reversed state y(s) = x(T - s)."""
        raise NotImplementedError

    def range_batch(self, t: float, X: np.ndarray, D: np.ndarray):
        """Vectorized (lo, hi) of <D_i, F(t, X_i)> per row; same as the
        scalar inner-product range but over point batches."""
        raise NotImplementedError

    def sup_norm_batch(self, t: float, X: np.ndarray) -> np.ndarray:
        """Vectorized sup{|y| : y in F(t, X_i)} per row."""
        raise NotImplementedError

    def _check_time(self, t: float) -> float:
        if not (0.0 <= t <= self.horizon):
            raise DomainError(f"t={t} outside [0, {self.horizon}]")
        return float(t)


class LinearBall(MultiMap):
    """F(t, x) = A x + b(t) + Ball(0, rho(t))."""

    def __init__(self, A, b, rho, horizon: float):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        if self.A.shape[0] != self.A.shape[1]:
            raise ValueError("A must be square")
        self.dim = self.A.shape[0]
        self.horizon = float(horizon)
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        self.b = self._as_pw(b, is_vector=True)
        self.rho = self._as_pw(rho, is_vector=False)
        if np.any(self.rho.values < 0):
            raise ValueError("rho must be nonnegative")

    def _as_pw(self, data, is_vector: bool) -> PiecewiseConstant:
        if isinstance(data, PiecewiseConstant):
            pw = data
        elif is_vector:
            pw = PiecewiseConstant.constant(as_vector(data, self.dim), self.horizon)
        else:
            pw = PiecewiseConstant.constant(float(data), self.horizon)
        if abs(pw.horizon - self.horizon) > 0:
            raise ValueError("piecewise data horizon disagrees with the map horizon")
        return pw

    def value(self, t: float, x) -> ConvexSet:
        t = self._check_time(t)
        x = as_vector(x, self.dim)
        return Ball(self.A @ x + self.b.value_at(t), float(self.rho.value_at(t)))

    def derive_growth(self) -> GrowthProfile:
        op = float(np.linalg.norm(self.A, 2))
        breaks = np.union1d(self.b.breakpoints, self.rho.breakpoints)
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        vals = [
            max(op, float(np.linalg.norm(self.b.value_at(tm))) + float(self.rho.value_at(tm)))
            for tm in mids
        ]
        return GrowthProfile(PiecewiseConstant(breaks, vals))

    def reversed(self) -> "LinearBall":
        return LinearBall(-self.A, _negate_pw(self.b.reversed()), self.rho.reversed(), self.horizon)

    def range_batch(self, t, X, D):
        t = self._check_time(t)
        centers = X @ self.A.T + self.b.value_at(t)
        dot = np.einsum("ij,ij->i", D, centers)
        spread = float(self.rho.value_at(t)) * np.linalg.norm(D, axis=1)
        return dot - spread, dot + spread

    def sup_norm_batch(self, t, X):
        t = self._check_time(t)
        centers = X @ self.A.T + self.b.value_at(t)
        return np.linalg.norm(centers, axis=1) + float(self.rho.value_at(t))


class AffineHull(MultiMap):
    """F(t, x) = conv { A_j x + b_j } for a fixed finite list of affine maps."""

    def __init__(self, pairs, horizon: float):
        if not pairs:
            raise ValueError("need at least one (A, b) pair")
        self.maps = []
        dim = None
        for A, b in pairs:
            A = np.atleast_2d(np.asarray(A, dtype=float))
            b = as_vector(b, A.shape[0])
            if A.shape[0] != A.shape[1]:
                raise ValueError("A must be square")
            if dim is None:
                dim = A.shape[0]
            elif A.shape[0] != dim:
                raise ValueError("all pairs must share one dimension")
            self.maps.append((A, b))
        self.dim = dim
        self.horizon = float(horizon)
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")

    def value(self, t: float, x) -> ConvexSet:
        self._check_time(t)
        x = as_vector(x, self.dim)
        return Polytope(np.stack([A @ x + b for A, b in self.maps]))

    def derive_growth(self) -> GrowthProfile:
        level = max(
            max(float(np.linalg.norm(A, 2)), float(np.linalg.norm(b))) for A, b in self.maps
        )
        return GrowthProfile(PiecewiseConstant.constant(level, self.horizon))

    def reversed(self) -> "AffineHull":
        return AffineHull([(-A, -b) for A, b in self.maps], self.horizon)

    def range_batch(self, t, X, D):
        self._check_time(t)
        dots = np.stack(
            [np.einsum("ij,ij->i", D, X @ A.T + b) for A, b in self.maps]
        )
        return dots.min(axis=0), dots.max(axis=0)

    def sup_norm_batch(self, t, X):
        self._check_time(t)
        norms = np.stack([np.linalg.norm(X @ A.T + b, axis=1) for A, b in self.maps])
        return norms.max(axis=0)


class Relay(MultiMap):
    """Scalar convexified relay: {-k sgn x} off the switching point, [-k, k] at it."""

    def __init__(self, k: float, horizon: float):
        self.k = float(k)
        if self.k <= 0:
            raise ValueError("relay gain must be positive")
        self.dim = 1
        self.horizon = float(horizon)
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")

    def value(self, t: float, x) -> ConvexSet:
        self._check_time(t)
        x = as_vector(x, 1)
        if x[0] == 0.0:
            return Polytope(np.array([[-self.k], [self.k]]))
        return Ball(np.array([-self.k * np.sign(x[0])]), 0.0)

    def derive_growth(self) -> GrowthProfile:
        return GrowthProfile(PiecewiseConstant.constant(self.k, self.horizon))

    def reversed(self) -> "MultiMap":
        raise ConfigError("the relay family does not support time reversal")

    def range_batch(self, t, X, D):
        self._check_time(t)
        d = D[:, 0]
        s = np.sign(X[:, 0])
        dot = -self.k * d * s
        at_zero = s == 0.0
        lo = np.where(at_zero, -self.k * np.abs(d), dot)
        hi = np.where(at_zero, self.k * np.abs(d), dot)
        return lo, hi

    def sup_norm_batch(self, t, X):
        self._check_time(t)
        return np.full(X.shape[0], self.k)


def _negate_pw(pw: PiecewiseConstant) -> PiecewiseConstant:
    return PiecewiseConstant(pw.breakpoints, -pw.values)


def select_extremal(F: MultiMap, t: float, x, direction, mode: str) -> np.ndarray:
    """Element of F(t, x) minimizing or maximizing <direction, y>.

    ``mode`` is "min" or "max"; a zero direction falls back to the
    center / first-vertex convention of the underlying set.
    """
    if mode not in ("min", "max"):
        raise ValueError(f"mode must be 'min' or 'max', got {mode!r}")
    direction = as_vector(direction, F.dim)
    sign = 1.0 if mode == "max" else -1.0
    return F.value(t, x).extreme_point(sign * direction)


def select_filtered(F: MultiMap, V, t: float, x, sign: int, R: float):
    """Extremal selection constrained by the guiding inequality outside |x| <= R.

    Inside the ball of radius R the gradient constraint is switched off and a
    plain extremal selection is returned.  Outside, the selection y* with the
    most favorable <grad V(x), y> is tested: it is returned only when
    sign * <grad V(x), y*> >= -FILTER_TOL, otherwise ``None`` signals that the
    constrained set is empty at (t, x).
    """
    if R <= 0:
        raise ValueError("filter radius R must be positive")
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    x = as_vector(x, F.dim)
    grad = V.grad(x)
    mode = "max" if sign > 0 else "min"
    y = select_extremal(F, t, x, grad, mode)
    if float(np.linalg.norm(x)) <= R:
        return y
    if sign * float(grad @ y) >= -FILTER_TOL:
        return y
    return None


@dataclass(frozen=True)
class HomotopyField:
    """Interpolation between the truncated potential field and the filtered map.

    At lam = 1 the value is the singleton {sign * truncated_gradient(x)};
    at lam = 0 it is the filtered extremal selection of ``base``.
    """

    base: MultiMap
    potential: object
    sign: int
    lam: float

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        if not (0.0 <= self.lam <= 1.0):
            raise ValueError("lambda must lie in [0, 1]")


def homotopy_value(H: HomotopyField, t: float, x, R: float):
    """lam * (sign * W(x)) + (1 - lam) * filtered selection; None propagates."""
    y = select_filtered(H.base, H.potential, t, x, H.sign, R)
    if y is None:
        return None
    w = H.potential.truncated_gradient(x)
    return H.lam * (H.sign * w) + (1.0 - H.lam) * y

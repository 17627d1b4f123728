"""Compact convex subsets of R^N and the support-function calculus on them.

Three concrete shapes cover every right-hand-side value the built-in
multimaps produce: balls, polytopes (vertex form), and singletons.  All
directional queries reduce to the support function

    support(A, v) = sup { <v, a> : a in A },

from which the lower/upper inner-product range of a set against a fixed
vector follows as (-support(A, -v), support(A, v)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "as_vector",
    "ConvexSet",
    "Ball",
    "Polytope",
    "Singleton",
    "inner_product_range",
]

#: tolerance used by the polytope projection and membership certificates
PROJECTION_TOL = 1e-10


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Coerce x to a finite 1-D float64 array, optionally checking its length."""
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got array of shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"expected a vector of length {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite components")
    return v


class ConvexSet:
    """Common interface of the concrete shapes below."""

    dim: int

    def support(self, v) -> float:
        """sup of <v, a> over the set."""
        raise NotImplementedError

    def extreme_point(self, v) -> np.ndarray:
        """An element attaining support(v); deterministic for v = 0."""
        raise NotImplementedError

    def distance_to(self, p) -> float:
        """Euclidean distance from p to the set (0 iff p is a member)."""
        raise NotImplementedError

    def centroid(self) -> np.ndarray:
        """A canonical interior representative (ball center / vertex mean)."""
        raise NotImplementedError

    def contains(self, p, tol: float = PROJECTION_TOL) -> bool:
        return self.distance_to(p) <= tol


@dataclass(frozen=True)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not (np.isfinite(self.radius) and self.radius >= 0.0):
            raise ValueError(f"ball radius must be finite and >= 0, got {self.radius}")
        object.__setattr__(self, "dim", self.center.shape[0])

    def support(self, v) -> float:
        v = as_vector(v, self.dim)
        return float(v @ self.center + self.radius * np.linalg.norm(v))

    def extreme_point(self, v) -> np.ndarray:
        v = as_vector(v, self.dim)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return self.center.copy()
        return self.center + (self.radius / nv) * v

    def distance_to(self, p) -> float:
        p = as_vector(p, self.dim)
        return max(0.0, float(np.linalg.norm(p - self.center)) - self.radius)

    def centroid(self) -> np.ndarray:
        return self.center.copy()


@dataclass(frozen=True)
class Polytope(ConvexSet):
    """Convex hull of a nonempty list of vertices (rows of `vertices`)."""

    vertices: np.ndarray

    def __post_init__(self):
        verts = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if verts.size == 0:
            raise ValueError("polytope needs at least one vertex")
        if not np.all(np.isfinite(verts)):
            raise ValueError("polytope vertices have non-finite components")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "dim", verts.shape[1])

    def support(self, v) -> float:
        v = as_vector(v, self.dim)
        return float(np.max(self.vertices @ v))

    def extreme_point(self, v) -> np.ndarray:
        v = as_vector(v, self.dim)
        if not np.any(v):
            return self.vertices[0].copy()
        dots = self.vertices @ v
        # ties broken by the lexicographically smallest vertex
        tied = np.flatnonzero(dots == np.max(dots))
        if tied.shape[0] == 1:
            return self.vertices[tied[0]].copy()
        order = np.lexsort(self.vertices[tied].T[::-1])
        return self.vertices[tied[order[0]]].copy()

    def distance_to(self, p) -> float:
        p = as_vector(p, self.dim)
        return float(np.linalg.norm(p - self.project(p)))

    def project(self, p) -> np.ndarray:
        """Euclidean projection of p onto the convex hull of the vertices."""
        p = as_vector(p, self.dim)
        verts = self.vertices
        if verts.shape[0] == 1:
            return verts[0].copy()
        if verts.shape[0] == 2:
            a, b = verts
            d = b - a
            dd = float(d @ d)
            if dd == 0.0:
                return a.copy()
            t = float(np.clip((p - a) @ d / dd, 0.0, 1.0))
            return a + t * d
        lam = _min_norm_coefficients(verts - p, tol=PROJECTION_TOL)
        return verts.T @ lam

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)


def Singleton(point) -> Ball:
    """Degenerate set {point}; identical to a radius-0 ball in every operation."""
    return Ball(as_vector(point), 0.0)


def inner_product_range(A: ConvexSet, v) -> tuple[float, float]:
    """(inf, sup) of <v, a> over a in A; lower <= upper always."""
    return (-A.support(-as_vector(v, A.dim)), A.support(v))


def _min_norm_coefficients(points: np.ndarray, tol: float) -> np.ndarray:
    """Wolfe's min-norm-point algorithm over the convex hull of `points` rows.

    Returns convex coefficients lam (lam >= 0, sum lam = 1) such that
    points.T @ lam is the hull element of minimum Euclidean norm.  Finite
    algorithm; `tol` only guards rank decisions and the optimality test.
    """
    m = points.shape[0]
    scale = max(1.0, float(np.max(np.abs(points))))
    # corral: index set S with convex weights w over it
    start = int(np.argmin(np.einsum("ij,ij->i", points, points)))
    S = [start]
    w = np.array([1.0])
    x = points[start].copy()
    for _ in range(16 * m + 64):
        # optimality: x already minimizes <x, q> over all vertices q
        dots = points @ x
        j = int(np.argmin(dots))
        if dots[j] >= float(x @ x) - tol * scale * scale:
            break
        if j in S:
            break
        S.append(j)
        w = np.append(w, 0.0)
        # minor cycle: affine minimizer over the corral, clipped to the simplex
        while True:
            Q = points[S]
            G = Q @ Q.T
            k = len(S)
            M = np.zeros((k + 1, k + 1))
            M[:k, :k] = G
            M[:k, k] = 1.0
            M[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            try:
                sol = np.linalg.solve(M, rhs)
                v = sol[:k]
            except np.linalg.LinAlgError:
                v, *_ = np.linalg.lstsq(M[:, :-1], rhs, rcond=None)
            if np.all(v > tol):
                w = v
                break
            # step toward v until the first weight hits zero, then drop it
            shrink = w - v
            mask = shrink > tol
            if not np.any(mask):
                w = np.clip(v, 0.0, None)
                w /= w.sum()
                break
            theta = np.min(w[mask] / shrink[mask])
            theta = float(np.clip(theta, 0.0, 1.0))
            w = (1.0 - theta) * w + theta * v
            keep = w > tol
            if np.all(keep):
                w = np.clip(w, 0.0, None)
                w /= w.sum()
                break
            S = [s for s, k_ in zip(S, keep) if k_]
            w = w[keep]
            w /= w.sum()
        x = points[S].T @ w
    lam = np.zeros(m)
    for s, ws in zip(S, w):
        lam[s] += ws
    lam = np.clip(lam, 0.0, None)
    lam /= lam.sum()
    return lam

"""Brouwer topological degree of continuous fields on boxes and balls, N <= 4.

The 1-D degree is the exact sign formula (sgn f(b) - sgn f(a)) / 2.  In
higher dimensions the boundary of the domain is triangulated (a ball reuses
the box triangulation with vertices projected radially), simplices are
bisected until on each one some coordinate of the field keeps a constant
sign with margin at least boundary_min_norm / sqrt(N), and the degree of the
resulting piecewise-linear boundary image is counted: a generic target ray
is shot from the origin and every simplex whose image cone contains it
contributes the product of its boundary orientation with the sign of the
image determinant.

Correctness is conditional on the refinement heuristic, which is why the
result records the refinement depth and the observed minimum of |f| on the
boundary, and why exhausting the budget raises instead of guessing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .convexset import as_vector
from .errors import DegenerateBoundaryError, InconclusiveDegreeError

__all__ = [
    "Box",
    "BallDom",
    "DegreeResult",
    "PoincareBohlResult",
    "brouwer_degree",
    "poincare_bohl_check",
    "boundary_points",
]

#: |f| at or below this on the boundary makes the degree undefined
ZERO_TOL = 1e-10
#: hard cap on dimension; boundary subdivision cost explodes beyond it
MAX_DIM = 4


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lower)
        hi = as_vector(self.upper, lo.shape[0])
        if not np.all(lo < hi):
            raise ValueError("box needs lower < upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


@dataclass(frozen=True)
class BallDom:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_vector(self.center)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.shape[0]


@dataclass(frozen=True)
class DegreeResult:
    value: int
    refinement_depth: int
    boundary_min_norm: float
    simplex_count: int = 0
    target_retries: int = 0


@dataclass(frozen=True)
class PoincareBohlResult:
    passed: bool
    min_norm: float
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.passed


class _FieldCache:
    """Memoized field evaluation that tracks the boundary minimum of |f|."""

    def __init__(self, f, dim: int):
        self.f = f
        self.dim = dim
        self.cache: dict[bytes, np.ndarray] = {}
        self.min_norm = np.inf

    def __call__(self, v: np.ndarray) -> np.ndarray:
        key = v.tobytes()
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        y = as_vector(self.f(v), self.dim)
        n = float(np.linalg.norm(y))
        if n < ZERO_TOL:
            raise DegenerateBoundaryError(
                f"|f| = {n:.3e} at boundary point {v!r}; degree undefined"
            )
        if n < self.min_norm:
            self.min_norm = n
        self.cache[key] = y
        return y


def brouwer_degree(f, domain, max_depth: int = 26, max_simplices: int = 200_000) -> DegreeResult:
    """Degree of f on the given Box or BallDom with respect to 0."""
    dim = domain.dim
    if dim > MAX_DIM:
        raise ValueError(f"dimension {dim} exceeds the supported cap {MAX_DIM}")
    if dim == 1:
        return _degree_1d(f, domain)

    project = _projector(domain)
    cached = _FieldCache(f, dim)
    queue = list(_initial_boundary_simplices(domain))
    accepted = []
    max_seen_depth = 0
    processed = 0
    while queue:
        verts, sigma, depth = queue.pop()
        processed += 1
        if processed > max_simplices:
            raise InconclusiveDegreeError(
                f"simplex budget {max_simplices} exhausted at depth {depth}"
            )
        images = np.stack([cached(v) for v in verts])
        margin = cached.min_norm / np.sqrt(dim)
        if _sign_constant_coordinate(images, margin):
            accepted.append((verts, images, sigma))
            max_seen_depth = max(max_seen_depth, depth)
            continue
        if depth >= max_depth:
            raise InconclusiveDegreeError(
                f"refinement depth {max_depth} reached without sign constancy"
            )
        queue.extend(_bisect(verts, sigma, depth, project))

    value, retries = _count_covering(accepted)
    return DegreeResult(
        value=value,
        refinement_depth=max_seen_depth,
        boundary_min_norm=float(cached.min_norm),
        simplex_count=len(accepted),
        target_retries=retries,
    )


def _degree_1d(f, domain) -> DegreeResult:
    if isinstance(domain, Box):
        a, b = float(domain.lower[0]), float(domain.upper[0])
    else:
        a = float(domain.center[0]) - domain.radius
        b = float(domain.center[0]) + domain.radius
    fa = float(as_vector(f(np.array([a])), 1)[0])
    fb = float(as_vector(f(np.array([b])), 1)[0])
    lo = min(abs(fa), abs(fb))
    if lo < ZERO_TOL:
        raise DegenerateBoundaryError(f"|f| = {lo:.3e} at an interval endpoint")
    value = int((np.sign(fb) - np.sign(fa)) / 2)
    return DegreeResult(value=value, refinement_depth=0, boundary_min_norm=lo, simplex_count=2)


def _projector(domain):
    if isinstance(domain, BallDom):
        center, radius = domain.center, domain.radius

        def project(v: np.ndarray) -> np.ndarray:
            d = v - center
            return center + (radius / np.linalg.norm(d)) * d

        return project
    return lambda v: v


def _initial_boundary_simplices(domain):
    """Consistently oriented boundary triangulation: per box face, a Kuhn
    triangulation of the (dim-1)-cube; ball domains project the vertices of
    the triangulated unit-box boundary onto the sphere."""
    if isinstance(domain, BallDom):
        box = Box(domain.center - domain.radius, domain.center + domain.radius)
        project = _projector(domain)
    else:
        box = domain
        project = None
    dim = box.dim
    for axis in range(dim):
        free = [j for j in range(dim) if j != axis]
        for side in (0, 1):
            corner = box.lower.copy()
            corner[axis] = box.upper[axis] if side else box.lower[axis]
            normal = np.zeros(dim)
            normal[axis] = 1.0 if side else -1.0
            for cube_simplex in _kuhn_triangulation(dim - 1):
                verts = []
                for u in cube_simplex:
                    v = corner.copy()
                    for uk, j in zip(u, free):
                        v[j] = box.upper[j] if uk else box.lower[j]
                    verts.append(v)
                edges = np.stack([w - verts[0] for w in verts[1:]], axis=1)
                sigma = int(np.sign(np.linalg.det(np.column_stack([normal, edges]))))
                if sigma == 0:
                    raise InconclusiveDegreeError("degenerate face simplex in triangulation")
                if project is not None:
                    verts = [project(v) for v in verts]
                yield tuple(verts), sigma, 0


def _kuhn_triangulation(d: int):
    """Simplices of the unit d-cube: one vertex chain per permutation."""
    if d == 0:
        return [((),)]
    out = []
    for perm in itertools.permutations(range(d)):
        chain = [np.zeros(d, dtype=int)]
        for axis in perm:
            nxt = chain[-1].copy()
            nxt[axis] = 1
            chain.append(nxt)
        out.append(tuple(tuple(v) for v in chain))
    return out


def _sign_constant_coordinate(images: np.ndarray, margin: float) -> bool:
    pos = np.all(images >= margin, axis=0)
    neg = np.all(images <= -margin, axis=0)
    return bool(np.any(pos | neg))


def _bisect(verts, sigma, depth, project):
    """Split along the longest edge; children inherit the orientation sign."""
    best = None
    best_len = -1.0
    k = len(verts)
    for a in range(k):
        for b in range(a + 1, k):
            length = float(np.sum((verts[a] - verts[b]) ** 2))
            if length > best_len + 0.0:
                best_len = length
                best = (a, b)
    a, b = best
    mid = project(0.5 * (verts[a] + verts[b]))
    child_a = tuple(mid if i == a else v for i, v in enumerate(verts))
    child_b = tuple(mid if i == b else v for i, v in enumerate(verts))
    return [(child_a, sigma, depth + 1), (child_b, sigma, depth + 1)]


def _count_covering(accepted) -> tuple[int, int]:
    """Count signed covers of a generic target direction by the image cones."""
    dim = accepted[0][1].shape[1] if accepted else 0
    for attempt in range(8):
        rng = np.random.default_rng(11731 + attempt)
        p = rng.standard_normal(dim)
        p /= np.linalg.norm(p)
        total = 0
        degenerate = False
        for _verts, images, sigma in accepted:
            unit = images / np.linalg.norm(images, axis=1, keepdims=True)
            # cheap cap prefilter: a small spherical simplex cannot cover a
            # direction far from its first vertex
            cap = float(np.max(np.linalg.norm(unit - unit[0], axis=1)))
            if cap < 0.8 and float(np.linalg.norm(p - unit[0])) > cap + 1e-9:
                continue
            M = unit.T
            det = float(np.linalg.det(M))
            if abs(det) < 1e-12:
                if cap < 0.8:
                    degenerate = True
                    break
                continue
            mu = np.linalg.solve(M, p)
            scale = float(np.max(np.abs(mu)))
            if float(np.min(np.abs(mu))) < 1e-9 * scale:
                degenerate = True
                break
            if np.all(mu > 0):
                total += sigma * (1 if det > 0 else -1)
        if not degenerate:
            return total, attempt
    raise InconclusiveDegreeError("no generic target direction found in 8 attempts")


def boundary_points(domain, samples: int) -> np.ndarray:
    """Deterministic sample of boundary points (rows)."""
    dim = domain.dim
    if isinstance(domain, BallDom):
        if dim == 1:
            offs = np.array([[-domain.radius], [domain.radius]])
            return domain.center[None, :] + offs
        from .potential import unit_directions

        dirs = unit_directions(dim, max(samples, 4))
        return domain.center[None, :] + domain.radius * dirs
    if dim == 1:
        return np.array([[float(domain.lower[0])], [float(domain.upper[0])]])
    per_axis = max(2, int(np.ceil((max(samples, 4) / (2 * dim)) ** (1.0 / (dim - 1)))))
    grids = [np.linspace(domain.lower[j], domain.upper[j], per_axis) for j in range(dim)]
    points = []
    for axis in range(dim):
        free = [j for j in range(dim) if j != axis]
        mesh = np.meshgrid(*[grids[j] for j in free], indexing="ij")
        flat = np.stack([m.ravel() for m in mesh], axis=1)
        for side_value in (float(domain.lower[axis]), float(domain.upper[axis])):
            block = np.empty((flat.shape[0], dim))
            block[:, axis] = side_value
            for col, j in enumerate(free):
                block[:, j] = flat[:, col]
            points.append(block)
    return np.unique(np.concatenate(points, axis=0), axis=0)


def poincare_bohl_check(f, g2, domain, samples: int = 200) -> PoincareBohlResult:
    """Does the linear homotopy between f and g2 stay nonzero on the boundary?

    Samples the boundary and a 101-point grid of the homotopy parameter;
    a failure reports the first offending (point, parameter) pair.
    """
    pts = boundary_points(domain, samples)
    lams = np.linspace(0.0, 1.0, 101)
    min_norm = np.inf
    witness = None
    for x in pts:
        fx = as_vector(f(x), domain.dim)
        gx = as_vector(g2(x), domain.dim)
        for lam in lams:
            n = float(np.linalg.norm(lam * fx + (1.0 - lam) * gx))
            if n < min_norm:
                min_norm = n
            if n <= ZERO_TOL and witness is None:
                witness = (x.copy(), float(lam))
    return PoincareBohlResult(passed=witness is None, min_norm=min_norm, witness=witness)

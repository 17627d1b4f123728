"""Potentials, their gradients, and guiding-behavior classification.

Two families with exactly computable gradients and sublevel radii:

* ``RadialPotential``: V(x) = phi(|x|^2 / 2) for a polynomial profile phi,
  so grad V(x) = phi'(|x|^2 / 2) x;
* ``QuadraticPotential``: V(x) = <x, A x> / 2 for symmetric A, grad V = A x.

``classify_guiding`` samples annuli between candidate radii and an outer
radius R_max and certifies, per tested point, which of the guiding
inequalities hold for a given multimap:

* weak_positive:  sup <grad V(x), F(t,x)> >= 0,
* weak_negative:  inf <grad V(x), F(t,x)> <= 0,
* strict_negative: sup <grad V(x), F(t,x)> < 0,

together with nonsingularity of the gradient.  The result is a certificate
that is sound on the tested grid only; the grid spacing is recorded so
downstream reports stay honest about resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ConfigError

__all__ = [
    "RadialPotential",
    "QuadraticPotential",
    "GuidingCertificate",
    "CheckResult",
    "classify_guiding",
    "check_monotone",
    "check_coercive",
    "sublevel_ball_radius",
    "level_point",
    "unit_directions",
]

#: weak/strict split: weak holds above -STRICT_MARGIN, strict below it
STRICT_MARGIN = 1e-10
#: gradient norms at or below this count as singular
NONSINGULAR_TOL = 1e-8


class RadialPotential:
    """V(x) = phi(u) at u = |x|^2 / 2, phi polynomial with given coefficients."""

    family = "radial"

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0 or not np.all(np.isfinite(c)):
            raise ValueError("profile coefficients must be a finite 1-D sequence")
        self.coeffs = c
        self.profile = Polynomial(c)
        self.profile_slope = self.profile.deriv()

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.profile(0.5 * float(x @ x)))

    def grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return float(self.profile_slope(0.5 * float(x @ x))) * x

    def value_batch(self, X) -> np.ndarray:
        u = 0.5 * np.einsum("ij,ij->i", X, X)
        return self.profile(u)

    def grad_batch(self, X) -> np.ndarray:
        u = 0.5 * np.einsum("ij,ij->i", X, X)
        return self.profile_slope(u)[:, None] * X

    def truncated_gradient(self, x) -> np.ndarray:
        return _truncate(self.grad(x))


class QuadraticPotential:
    """V(x) = <x, A x> / 2 for a symmetric matrix A."""

    family = "quadratic"

    def __init__(self, A):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        scale = max(1.0, float(np.max(np.abs(A))))
        if float(np.max(np.abs(A - A.T))) > 1e-12 * scale:
            raise ValueError("A must be symmetric")
        self.A = 0.5 * (A + A.T)

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ self.A @ x)

    def grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.A @ x

    def value_batch(self, X) -> np.ndarray:
        return 0.5 * np.einsum("ij,ij->i", X @ self.A.T, X)

    def grad_batch(self, X) -> np.ndarray:
        return X @ self.A.T

    def truncated_gradient(self, x) -> np.ndarray:
        return _truncate(self.grad(x))


def _truncate(g: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(g))
    return g if n <= 1.0 else g / n


@dataclass(frozen=True)
class GuidingCertificate:
    """Outcome of guiding classification over a sampled annulus family.

    ``R`` is the smallest tested radius whose outer annulus satisfied the
    strongest available inequality at every sample; ``r`` exceeds the sampled
    maximum of V over the ball of radius R by one.  ``verified`` is False for
    certificates asserted by the user rather than produced by sampling.
    """

    R: float
    r: float
    classification: str
    satisfied: tuple
    sample_resolution: float
    R_max: float
    verified: bool = True

    @classmethod
    def assumed(cls, R: float, r: float = float("nan")) -> "GuidingCertificate":
        if R <= 0:
            raise ValueError("R must be positive")
        return cls(
            R=float(R),
            r=float(r),
            classification="none",
            satisfied=(),
            sample_resolution=float("nan"),
            R_max=float("nan"),
            verified=False,
        )

    def allows_sign(self, sign: int) -> bool:
        if not self.verified:
            return True
        if sign > 0:
            return "weak_positive" in self.satisfied
        return "weak_negative" in self.satisfied or "strict_negative" in self.satisfied


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    witness: tuple | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


def unit_directions(dim: int, count: int) -> np.ndarray:
    """Deterministic set of unit vectors: axis pair (1-D), uniform angles
    (2-D), Fibonacci sphere (3-D), seeded Gaussian directions otherwise."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        ang = 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if dim == 3:
        k = np.arange(count)
        z = 1.0 - 2.0 * (k + 0.5) / count
        phi = k * np.pi * (3.0 - np.sqrt(5.0))
        s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)
    rng = np.random.default_rng(785631)
    D = rng.standard_normal((count, dim))
    return D / np.linalg.norm(D, axis=1, keepdims=True)


def classify_guiding(V, F, R_max: float, resolution: int) -> GuidingCertificate:
    """Search annuli [R, R_max] for the strongest guiding inequality of V vs F.

    Candidate radii are the uniform grid j * R_max / resolution.  Every tested
    point must have a nonsingular gradient and satisfy the inequality class
    uniformly over a (resolution + 1)-node time grid.
    """
    if R_max <= 0 or resolution < 2:
        raise ConfigError("degenerate classification grid: need R_max > 0 and resolution >= 2")
    dim = _potential_dim(V, F)
    radii = R_max * np.arange(1, resolution + 1) / resolution
    spacing = R_max / resolution
    if dim == 1:
        dirs = unit_directions(1, 2)
    elif dim == 2:
        dirs = unit_directions(2, max(16, 2 * resolution))
    else:
        dirs = unit_directions(dim, max(32, resolution * resolution))
    n_dir = dirs.shape[0]
    X = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, dim)
    G = V.grad_batch(X)
    grad_ok = np.linalg.norm(G, axis=1) > NONSINGULAR_TOL

    t_nodes = np.linspace(0.0, F.horizon, resolution + 1)
    worst_lo = np.full(X.shape[0], -np.inf)
    worst_hi_min = np.full(X.shape[0], np.inf)
    worst_hi_max = np.full(X.shape[0], -np.inf)
    for t in t_nodes:
        lo, hi = F.range_batch(float(t), X, G)
        np.maximum(worst_lo, lo, out=worst_lo)
        np.minimum(worst_hi_min, hi, out=worst_hi_min)
        np.maximum(worst_hi_max, hi, out=worst_hi_max)

    def band_all(flags: np.ndarray) -> np.ndarray:
        return flags.reshape(len(radii), n_dir).all(axis=1)

    ok_nonsing = band_all(grad_ok)
    ok_weak_pos = band_all(worst_hi_min >= -STRICT_MARGIN)
    ok_weak_neg = band_all(worst_lo <= STRICT_MARGIN)
    ok_strict = band_all(worst_hi_max <= -STRICT_MARGIN)

    def suffix_all(band: np.ndarray) -> np.ndarray:
        return np.logical_and.accumulate(band[::-1])[::-1]

    suf_nonsing = suffix_all(ok_nonsing)
    suffixes = {
        "strict_negative": suffix_all(ok_strict) & suf_nonsing,
        "weak_positive": suffix_all(ok_weak_pos) & suf_nonsing,
        "weak_negative": suffix_all(ok_weak_neg) & suf_nonsing,
    }
    hit = None
    for j in range(len(radii)):
        names = tuple(name for name in suffixes if suffixes[name][j])
        if names:
            hit = (j, names)
            break
    if hit is None:
        r_all = float(np.max(V.value_batch(X))) if X.size else 0.0
        r_all = max(r_all, V.value(np.zeros(dim))) + 1.0
        return GuidingCertificate(
            R=float(R_max),
            r=r_all,
            classification="none",
            satisfied=(),
            sample_resolution=spacing,
            R_max=float(R_max),
        )
    j, names = hit
    order = ("strict_negative", "weak_positive", "weak_negative")
    classification = next(name for name in order if name in names)
    inner = X.reshape(len(radii), n_dir, dim)[: j + 1].reshape(-1, dim)
    r = max(float(np.max(V.value_batch(inner))), V.value(np.zeros(dim))) + 1.0
    satisfied = tuple(name for name in order if name in names)
    return GuidingCertificate(
        R=float(radii[j]),
        r=r,
        classification=classification,
        satisfied=satisfied,
        sample_resolution=spacing,
        R_max=float(R_max),
    )


def _potential_dim(V, F=None) -> int:
    if isinstance(V, QuadraticPotential):
        return V.A.shape[0]
    if F is not None:
        return F.dim
    raise ValueError("cannot infer dimension for a radial potential without a multimap")


def check_monotone(V, samples: int = 200, seed: int = 0, u_max: float = 5000.0) -> CheckResult:
    """Is V nondecreasing in |x|?  Exact profile check plus random pair probe."""
    if isinstance(V, RadialPotential):
        result = _radial_slope_min(V, u_max)
        if result is not None:
            u_star, slope = result
            if slope < -1e-12:
                witness = _radial_descent_witness(V, u_star, u_max)
                return CheckResult(False, witness, f"profile slope {slope:.3e} at u={u_star:.6g}")
        dim_guess = 1
    elif isinstance(V, QuadraticPotential):
        A = V.A
        n = A.shape[0]
        a = float(np.trace(A)) / n
        scale = max(1.0, abs(a))
        if float(np.max(np.abs(A - a * np.eye(n)))) > 1e-12 * scale:
            lam, vec = np.linalg.eigh(A)
            return CheckResult(
                False,
                (vec[:, -1].copy(), vec[:, 0].copy()),
                f"A is not a multiple of the identity (eigenvalues {lam[0]:.6g}..{lam[-1]:.6g})",
            )
        if a < -1e-12:
            e = np.zeros(n)
            e[0] = 1.0
            return CheckResult(False, (e, 2.0 * e), f"negative radial coefficient {a:.6g}")
        dim_guess = n
    else:
        raise TypeError(f"unsupported potential {type(V).__name__}")

    rng = np.random.default_rng(seed)
    for _ in range(samples):
        p = rng.standard_normal(dim_guess) * rng.uniform(0.1, 10.0)
        q = rng.standard_normal(dim_guess) * rng.uniform(0.1, 10.0)
        x, y = (p, q) if np.linalg.norm(p) <= np.linalg.norm(q) else (q, p)
        vx, vy = V.value(x), V.value(y)
        if vx > vy + 1e-9 * (1.0 + abs(vx) + abs(vy)):
            return CheckResult(False, (x, y), f"V({x})={vx:.6g} > V({y})={vy:.6g}")
    return CheckResult(True, None, "profile check and pair sampling passed")


def _radial_slope_min(V: RadialPotential, u_max: float):
    """(argmin, min) of phi' over [0, u_max] via its critical points."""
    slope = V.profile_slope
    candidates = [0.0, float(u_max)]
    curv = slope.deriv()
    if curv.degree() >= 0 and np.any(curv.coef != 0.0):
        for root in curv.roots():
            if abs(root.imag) < 1e-9 and 0.0 <= root.real <= u_max:
                candidates.append(float(root.real))
    values = [float(slope(u)) for u in candidates]
    k = int(np.argmin(values))
    return candidates[k], values[k]


def _radial_descent_witness(V: RadialPotential, u_star: float, u_max: float):
    """Pair (x, y), |x| <= |y|, with V(x) > V(y), near a negative-slope point."""
    base = float(V.profile(u_star))
    step = 1e-3 * (1.0 + u_star)
    for _ in range(60):
        u_b = u_star + step
        if float(V.profile(u_b)) < base:
            x = np.array([np.sqrt(2.0 * u_star)])
            y = np.array([np.sqrt(2.0 * u_b)])
            return (x, y)
        step *= 2.0
    return None


def check_coercive(V) -> CheckResult:
    """Does V(x) grow without bound as |x| grows?"""
    if isinstance(V, RadialPotential):
        coef = np.trim_zeros(V.coeffs, "b")
        if coef.size <= 1:
            return CheckResult(False, None, "constant profile")
        lead = float(coef[-1])
        if lead > 0:
            return CheckResult(True, None, f"leading profile coefficient {lead:.6g} > 0")
        return CheckResult(False, None, f"leading profile coefficient {lead:.6g} <= 0")
    if isinstance(V, QuadraticPotential):
        lam_min = float(np.linalg.eigvalsh(V.A)[0])
        if lam_min > 1e-10:
            return CheckResult(True, None, f"smallest eigenvalue {lam_min:.6g} > 0")
        return CheckResult(False, None, f"smallest eigenvalue {lam_min:.6g} <= 0")
    raise TypeError(f"unsupported potential {type(V).__name__}")


def sublevel_ball_radius(V, r: float) -> float:
    """Radius rho with V(x) > r whenever |x| > rho (requires coercive V)."""
    if not check_coercive(V).passed:
        raise ConfigError("sublevel radius needs a coercive potential")
    v0 = V.value(np.zeros(_any_dim(V)))
    if r <= v0:
        raise ConfigError(f"level {r} must exceed V(0) = {v0}")
    if isinstance(V, RadialPotential):
        return float(np.sqrt(2.0 * _largest_level_root(V, r))) + 1e-6
    lam_min = float(np.linalg.eigvalsh(V.A)[0])
    return float(np.sqrt(2.0 * r / lam_min))


def level_point(V, r: float, direction: np.ndarray) -> np.ndarray:
    """The point of the level set {V = r} along a unit direction."""
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    if isinstance(V, RadialPotential):
        return float(np.sqrt(2.0 * _largest_level_root(V, r))) * e
    quad = float(e @ V.A @ e)
    if quad <= 0:
        raise ConfigError("level set unbounded along this direction")
    return float(np.sqrt(2.0 * r / quad)) * e


def _largest_level_root(V: RadialPotential, r: float) -> float:
    shifted = V.profile - r
    roots = shifted.roots()
    real = [z.real for z in roots if abs(z.imag) < 1e-9 * (1.0 + abs(z)) and z.real >= 0.0]
    if not real:
        raise ConfigError(f"profile never reaches level {r}")
    return float(max(real))


def _any_dim(V) -> int:
    if isinstance(V, QuadraticPotential):
        return V.A.shape[0]
    return 1

"""Closed-form growth and localization bounds used for certification.

With m = integral of the growth rate mu over [0, T]:

* upper envelope:  |x(t)| <= (|x0| + 1) e^m - 1  (Gronwall),
* lower envelope:  |x(t)| >= (|x0| + 1) e^-m - 1  (escape bound),
* a-priori radius for strictly negatively guided problems:
      M = [m + (R + 1) e^m - 1] e^m,
* invariant-ball radius for a contractive boundary map with growth
  |g(x)| <= c ||x|| + d, c < 1:  both the plain radius (c m + d) / (1 - c)
  and a corrected radius consistent with the affine growth bound,
      r = (c (e^m - 1) + d) / (1 - c e^m),   defined only when c e^m < 1.

The plain and corrected invariant-ball radii coincide at m = 0.  The plain
formula treats the solution spread over [0, T] as |x0| + m, which matches a
velocity bound |x'| <= mu(t); under the affine bound mu(t)(1 + |x|) the
spread is the Gronwall envelope instead, whence the corrected variant.  The
solver prefers the corrected radius whenever it is defined and reports both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "BoundReport",
    "SchauderRadii",
    "gronwall_upper",
    "escape_lower",
    "apriori_bound",
    "schauder_radius",
    "standard_bound_reports",
]


@dataclass(frozen=True)
class BoundReport:
    """One computed bound with its inputs echoed for the report."""

    kind: str
    inputs: dict
    value: float
    extra: dict = field(default_factory=dict)

    def to_mapping(self) -> dict:
        return {
            "kind": self.kind,
            "inputs": dict(sorted(self.inputs.items())),
            "value": self.value,
            "extra": dict(sorted(self.extra.items())),
        }


@dataclass(frozen=True)
class SchauderRadii:
    paper_radius: float
    corrected_radius: float | None


def gronwall_upper(x0_norm: float, mu_total: float) -> float:
    """(|x0| + 1) e^m - 1; least upper envelope under the affine growth bound."""
    _require_nonneg(x0_norm=x0_norm, mu_total=mu_total)
    return (x0_norm + 1.0) * math.exp(mu_total) - 1.0


def escape_lower(x0_norm: float, mu_total: float) -> float:
    """(|x0| + 1) e^-m - 1; may be negative, in which case it is vacuous."""
    _require_nonneg(x0_norm=x0_norm, mu_total=mu_total)
    return (x0_norm + 1.0) * math.exp(-mu_total) - 1.0


def apriori_bound(R: float, mu_total: float) -> float:
    """[m + (R + 1) e^m - 1] e^m; confines all solutions of strictly
    negatively guided problems with guiding radius R."""
    _require_nonneg(mu_total=mu_total)
    if R <= 0:
        raise ValueError(f"guiding radius must be positive, got {R}")
    em = math.exp(mu_total)
    return (mu_total + (R + 1.0) * em - 1.0) * em


def schauder_radius(c: float, d: float, mu_total: float) -> SchauderRadii:
    """Invariant-ball radii for the boundary-map fixed-point iteration.

    ``corrected_radius`` is None when c e^m >= 1 (no ball of any radius is
    invariant under the Gronwall-consistent estimate).
    """
    if not 0.0 < c < 1.0:
        raise ValueError(f"growth coefficient c must lie in (0, 1), got {c}")
    _require_nonneg(d=d, mu_total=mu_total)
    paper = (c * mu_total + d) / (1.0 - c)
    em = math.exp(mu_total)
    if c * em < 1.0:
        corrected = (c * (em - 1.0) + d) / (1.0 - c * em)
    else:
        corrected = None
    return SchauderRadii(paper_radius=paper, corrected_radius=corrected)


def standard_bound_reports(
    x0_norm: float, mu_total: float, R: float | None, c: float | None, d: float | None
) -> list[BoundReport]:
    """The four standard bounds, skipping those whose inputs are unavailable."""
    reports = [
        BoundReport(
            "gronwall_upper",
            {"x0_norm": x0_norm, "mu_total": mu_total},
            gronwall_upper(x0_norm, mu_total),
        ),
        BoundReport(
            "escape_lower",
            {"x0_norm": x0_norm, "mu_total": mu_total},
            escape_lower(x0_norm, mu_total),
        ),
    ]
    if R is not None and R > 0:
        reports.append(
            BoundReport("apriori_M", {"R": R, "mu_total": mu_total}, apriori_bound(R, mu_total))
        )
    if c is not None and d is not None and 0.0 < c < 1.0 and d >= 0.0:
        radii = schauder_radius(c, d, mu_total)
        reports.append(
            BoundReport(
                "schauder_radius",
                {"c": c, "d": d, "mu_total": mu_total},
                radii.paper_radius,
                extra={"corrected_radius": radii.corrected_radius},
            )
        )
    return reports


def _require_nonneg(**kwargs: float) -> None:
    for name, value in kwargs.items():
        if value < 0:
            raise ValueError(f"{name} must be nonnegative, got {value}")

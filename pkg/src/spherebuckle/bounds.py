"""Eigenvalue bound formulas and inequality checks.

All quantities live on sequences lambda_1 <= ... <= lambda_k with
lambda_i > n - 2. Two composite factors recur:

    w(lam) = lam - (n-2)/(lam - (n-2))        (weight term)
    p(lam) = lam + (n-2)^2/4                  (plus term)

From these the averaged coefficients

    S = (1/k) sum lam_i + (1/2k) sum w_i p_i
    T = (1/k) sum lam_i^2 + (1/k) sum lam_i w_i p_i

give the quadratic-root bounds lambda_{k+1} <= S + sqrt(S^2 - T),
lambda_{k+1} - lambda_k <= 2 sqrt(S^2 - T), lambda_k >= S - sqrt(S^2 - T).
The inequality checks compare a candidate next eigenvalue against the
quadratic form these bounds were solved from, against its Yang-type
consequence, against the one-parameter delta family the main bound
dominates, and against the Chebyshev-type product rearrangement used to
chain the first into the second.

Sums are accumulated with error-free compensated summation (math.fsum):
slacks near saturation must not be swamped by rounding.

At n = 2 both correction terms vanish and w = p = lam exactly.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from math import exp, fsum, log, sqrt
from typing import Any, Sequence

from .errors import (
    AllGapsZero,
    InvalidDelta,
    InvalidInput,
    NegativeDiscriminant,
    OrderViolation,
    SingularTerm,
)
from .spectrum import Spectrum

__all__ = [
    "DEFAULT_REL_TOL",
    "BoundTerms",
    "CheckRecord",
    "BoundReport",
    "bound_terms",
    "compute_S_T",
    "bound_next",
    "check_theorem",
    "check_yang",
    "wangxia_rhs",
    "optimal_delta",
    "dominance_gap",
    "chebyshev_check",
    "default_delta_grid",
    "build_report",
    "report_to_json",
    "report_to_csv_rows",
    "CSV_COLUMNS",
]

# All checked quantities are O(lambda^2 k); a relative tolerance anchored at
# max(|lhs|, |rhs|, 1) behaves uniformly across scales.
DEFAULT_REL_TOL = 1e-10

CSV_COLUMNS = (
    "n",
    "theta0",
    "k",
    "inequality_id",
    "lhs",
    "rhs",
    "slack",
    "holds",
    "delta",
    "meta_N",
    "meta_order",
)


@dataclass(frozen=True)
class BoundTerms:
    """The two composite factors of one eigenvalue."""

    w: float
    p: float


@dataclass(frozen=True)
class CheckRecord:
    """One evaluated inequality: sides, slack = rhs - lhs, verdict."""

    inequality_id: str
    lhs: float
    rhs: float
    slack: float
    holds: bool
    delta: float | None = None

    @staticmethod
    def make(
        inequality_id: str,
        lhs: float,
        rhs: float,
        rel_tol: float = DEFAULT_REL_TOL,
        delta: float | None = None,
    ) -> "CheckRecord":
        slack = rhs - lhs
        tol = rel_tol * max(abs(lhs), abs(rhs), 1.0)
        return CheckRecord(inequality_id, lhs, rhs, slack, slack >= -tol, delta)


@dataclass(frozen=True)
class BoundReport:
    """Everything the bound layer can say about one (spectrum, k) pair."""

    n: int
    k: int
    S: float
    T: float
    upper_next: float
    gap_upper: float
    lower_prev: float
    checks: tuple[CheckRecord, ...]
    delta_star: float | None = None
    theta0: float | None = None
    meta: dict[str, Any] = field(default_factory=dict)


def bound_terms(lam: float, n: int) -> BoundTerms:
    """w and p factors of a single eigenvalue; requires lam > n - 2."""
    c = float(n - 2)
    if lam <= c:
        raise SingularTerm(f"lambda={lam!r} must exceed n-2={c}")
    w = lam if n == 2 else lam - c / (lam - c)
    p = lam if n == 2 else lam + c * c / 4.0
    return BoundTerms(w=w, p=p)


def _terms(s: Spectrum, k: int) -> list[BoundTerms]:
    if not 1 <= k <= len(s.values):
        raise InvalidInput(f"need 1 <= k <= {len(s.values)}, got k={k}")
    return [bound_terms(lam, s.n) for lam in s.values[:k]]


def compute_S_T(s: Spectrum, k: int) -> tuple[float, float]:
    """Averaged quadratic coefficients over the first k eigenvalues."""
    t = _terms(s, k)
    lams = s.values[:k]
    S = fsum(lams) / k + fsum(ti.w * ti.p for ti in t) / (2 * k)
    T = fsum(l * l for l in lams) / k + fsum(
        l * ti.w * ti.p for l, ti in zip(lams, t)
    ) / k
    return S, T


def bound_next(s: Spectrum, k: int) -> tuple[float, float, float]:
    """Quadratic-root bounds (upper_next, gap_upper, lower_prev).

    For k = 1 the discriminant collapses to (w p / 2)^2, so the upper bound
    is exactly lambda_1 + w p and the lower bound is exactly lambda_1.
    """
    S, T = compute_S_T(s, k)
    disc = fsum((S * S, -T))
    if disc < 0.0:
        raise NegativeDiscriminant(S, T)
    root = sqrt(disc)
    return S + root, 2.0 * root, S - root


def _gaps(s: Spectrum, k: int, lambda_next: float) -> list[float]:
    if lambda_next < s.values[k - 1]:
        raise OrderViolation(
            f"lambda_next={lambda_next!r} below k-th value {s.values[k - 1]!r}"
        )
    return [lambda_next - lam for lam in s.values[:k]]


def check_theorem(
    s: Spectrum, k: int, lambda_next: float, rel_tol: float = DEFAULT_REL_TOL
) -> CheckRecord:
    """Main quadratic inequality at a candidate next eigenvalue.

    lhs = sum gap_i^2 (2 + (n-2)/(lam_i - (n-2)))
    rhs = 2 sqrt(sum gap_i^2 w_i) sqrt(sum gap_i p_i)
    """
    t = _terms(s, k)
    gaps = _gaps(s, k, lambda_next)
    c = float(s.n - 2)
    lhs = fsum(
        g * g * (2.0 + (0.0 if s.n == 2 else c / (lam - c)))
        for g, lam in zip(gaps, s.values[:k])
    )
    sw = fsum(g * g * ti.w for g, ti in zip(gaps, t))
    sp = fsum(g * ti.p for g, ti in zip(gaps, t))
    rhs = 2.0 * sqrt(max(sw * sp, 0.0))
    return CheckRecord.make("thm14", lhs, rhs, rel_tol)


def check_yang(
    s: Spectrum, k: int, lambda_next: float, rel_tol: float = DEFAULT_REL_TOL
) -> CheckRecord:
    """Yang-type consequence: sum gap_i^2 <= sum gap_i w_i p_i."""
    t = _terms(s, k)
    gaps = _gaps(s, k, lambda_next)
    lhs = fsum(g * g for g in gaps)
    rhs = fsum(g * ti.w * ti.p for g, ti in zip(gaps, t))
    return CheckRecord.make("yang15", lhs, rhs, rel_tol)


def wangxia_rhs(
    s: Spectrum,
    k: int,
    lambda_next: float,
    delta: float,
    rel_tol: float = DEFAULT_REL_TOL,
) -> CheckRecord:
    """One member of the delta family of upper-bound inequalities.

    lhs = 2 sum gap_i^2
    rhs = sum gap_i^2 (delta lam_i + delta^2 (lam_i-(n-2)) / (4(delta lam_i+n-2)))
          + (1/delta) sum gap_i p_i
    """
    if not delta > 0.0:
        raise InvalidDelta(f"delta must be positive, got {delta!r}")
    t = _terms(s, k)
    gaps = _gaps(s, k, lambda_next)
    c = float(s.n - 2)
    lhs = 2.0 * fsum(g * g for g in gaps)
    quad = fsum(
        g * g * (delta * lam + delta * delta * (lam - c) / (4.0 * (delta * lam + c)))
        for g, lam in zip(gaps, s.values[:k])
    )
    lin = fsum(g * ti.p for g, ti in zip(gaps, t)) / delta
    rhs = quad + lin
    return CheckRecord.make("wx13", lhs, rhs, rel_tol, delta=delta)


def optimal_delta(s: Spectrum, k: int, lambda_next: float) -> tuple[float, float]:
    """Closed-form minimizer of delta sum gap^2 w + (1/delta) sum gap p.

    Returns (delta_star, minimized value). By the arithmetic-geometric mean
    saturation the minimized value equals the rhs of check_theorem.
    """
    t = _terms(s, k)
    gaps = _gaps(s, k, lambda_next)
    sw = fsum(g * g * ti.w for g, ti in zip(gaps, t))
    sp = fsum(g * ti.p for g, ti in zip(gaps, t))
    if sp == 0.0:
        # p > 0 always, so this means every gap vanishes and delta* is 0/0.
        raise AllGapsZero("all gaps vanish; delta* is 0/0")
    if sw <= 0.0:
        # Possible only when some w < 0, i.e. lambda barely above n-2.
        raise InvalidInput(
            f"delta* undefined: sum gap^2 w = {sw!r} is not positive"
        )
    delta_star = sqrt(sp / sw)
    minimized = delta_star * sw + sp / delta_star
    return delta_star, minimized


def dominance_gap(
    s: Spectrum,
    k: int,
    lambda_next: float,
    delta_grid: Sequence[float],
    rel_tol: float = DEFAULT_REL_TOL,
) -> list[tuple[float, float, float, float]]:
    """Compare each delta-family rhs against the delta-free dominating quantity.

    new_rhs = -sum gap_i^2 (n-2)/(lam_i-(n-2))
              + 2 sqrt(sum gap_i^2 w_i) sqrt(sum gap_i p_i)

    Returns (delta, wx_rhs, new_rhs, gap) per grid point; the dominance claim
    is gap >= 0 for every delta.
    """
    if not delta_grid:
        raise InvalidInput("delta grid is empty")
    t = _terms(s, k)
    gaps = _gaps(s, k, lambda_next)
    c = float(s.n - 2)
    corr = fsum(
        0.0 if s.n == 2 else g * g * c / (lam - c)
        for g, lam in zip(gaps, s.values[:k])
    )
    sw = fsum(g * g * ti.w for g, ti in zip(gaps, t))
    sp = fsum(g * ti.p for g, ti in zip(gaps, t))
    new_rhs = -corr + 2.0 * sqrt(max(sw * sp, 0.0))
    out = []
    for d in delta_grid:
        wx = wangxia_rhs(s, k, lambda_next, d, rel_tol)
        out.append((d, wx.rhs, new_rhs, wx.rhs - new_rhs))
    return out


def chebyshev_check(
    s: Spectrum, k: int, lambda_next: float, rel_tol: float = DEFAULT_REL_TOL
) -> CheckRecord:
    """Product rearrangement for ordered spectra.

    (sum gap^2 w)(sum gap p) <= (sum gap^2)(sum gap w p).
    """
    t = _terms(s, k)
    gaps = _gaps(s, k, lambda_next)
    sw = fsum(g * g * ti.w for g, ti in zip(gaps, t))
    sp = fsum(g * ti.p for g, ti in zip(gaps, t))
    s2 = fsum(g * g for g in gaps)
    swp = fsum(g * ti.w * ti.p for g, ti in zip(gaps, t))
    return CheckRecord.make("chebyshev", sw * sp, s2 * swp, rel_tol)


def default_delta_grid(
    lo: float = 1e-2, hi: float = 1e2, points: int = 50
) -> list[float]:
    """Log-spaced delta samples; the default window brackets delta* ~ 1/sqrt(lambda)."""
    if not (lo > 0.0 and hi > lo and points >= 1):
        raise InvalidInput(f"bad delta grid ({lo}, {hi}, {points})")
    if points == 1:
        return [lo]
    la, lb = log(lo), log(hi)
    return [exp(la + (lb - la) * i / (points - 1)) for i in range(points)]


def build_report(
    s: Spectrum,
    k: int,
    lambda_next: float | None = None,
    delta_grid: Sequence[float] | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
    theta0: float | None = None,
    meta: dict[str, Any] | None = None,
) -> BoundReport:
    """Evaluate every bound and check for one (spectrum, k).

    When lambda_next is omitted the quadratic upper bound itself is used as
    the candidate, which exercises the inequalities at their saturation
    point.
    """
    S, T = compute_S_T(s, k)
    upper, gap_up, lower = bound_next(s, k)
    lam_next = upper if lambda_next is None else lambda_next
    checks: list[CheckRecord] = [
        check_theorem(s, k, lam_next, rel_tol),
        check_yang(s, k, lam_next, rel_tol),
        CheckRecord.make("upper16", lam_next, upper, rel_tol),
        CheckRecord.make(
            "gap17", lam_next - s.values[k - 1], gap_up, rel_tol
        ),
        CheckRecord.make("lower216", lower, s.values[k - 1], rel_tol),
        chebyshev_check(s, k, lam_next, rel_tol),
    ]
    delta_star: float | None = None
    try:
        delta_star, _ = optimal_delta(s, k, lam_next)
    except (AllGapsZero, InvalidInput):
        pass
    grid = list(delta_grid) if delta_grid is not None else default_delta_grid()
    lhs2 = 2.0 * _sum_sq_gaps(s, k, lam_next)
    for d, wx, new, _g in dominance_gap(s, k, lam_next, grid, rel_tol):
        checks.append(CheckRecord.make("wx13", lhs2, wx, rel_tol, delta=d))
        checks.append(CheckRecord.make("dominance", new, wx, rel_tol, delta=d))
    return BoundReport(
        n=s.n,
        k=k,
        S=S,
        T=T,
        upper_next=upper,
        gap_upper=gap_up,
        lower_prev=lower,
        checks=tuple(checks),
        delta_star=delta_star,
        theta0=theta0,
        meta=dict(meta or {}),
    )


def _sum_sq_gaps(s: Spectrum, k: int, lambda_next: float) -> float:
    return fsum((lambda_next - lam) ** 2 for lam in s.values[:k])


def report_to_json(report: BoundReport) -> str:
    doc = {
        "n": report.n,
        "theta0": report.theta0,
        "k": report.k,
        "S": report.S,
        "T": report.T,
        "upper_next": report.upper_next,
        "gap_upper": report.gap_upper,
        "lower_prev": report.lower_prev,
        "delta_star": report.delta_star,
        "checks": [
            {
                "inequality_id": c.inequality_id,
                "lhs": c.lhs,
                "rhs": c.rhs,
                "slack": c.slack,
                "holds": c.holds,
                "delta": c.delta,
            }
            for c in report.checks
        ],
        "meta": report.meta,
    }
    return json.dumps(doc, indent=2)


def report_to_csv_rows(report: BoundReport) -> list[dict[str, Any]]:
    """Flatten a report into rows under the fixed CSV schema."""
    rows = []
    for c in report.checks:
        rows.append(
            {
                "n": report.n,
                "theta0": "" if report.theta0 is None else f"{report.theta0:.17g}",
                "k": report.k,
                "inequality_id": c.inequality_id,
                "lhs": f"{c.lhs:.17g}",
                "rhs": f"{c.rhs:.17g}",
                "slack": f"{c.slack:.17g}",
                "holds": str(c.holds).lower(),
                "delta": "" if c.delta is None else f"{c.delta:.17g}",
                "meta_N": report.meta.get("N", ""),
                "meta_order": report.meta.get("order", ""),
            }
        )
    return rows


def rows_to_csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(CSV_COLUMNS), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()

"""Verification campaigns over (dimension, aperture) grids.

A campaign solves each cap, then exercises every bound and inequality on
the computed spectrum: the quadratic upper bound and its consequences at
each truncation depth, the one-parameter family across a delta grid with
its closed-form minimizer, the dominance of the delta-free bound, the
first-eigenvalue floor, and the energy-split identity on the first
axisymmetric pair. Results are flat check records with a deterministic
ordering, serialized to JSON (full report) or CSV (fixed columns).

A failed check whose slack is within the grid-refinement tolerance of
zero is labeled inconclusive rather than violated: discretization error
must not masquerade as a counterexample to an exact inequality.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

from .bounds import (
    BoundReport,
    CheckRecord,
    build_report,
    check_theorem,
    default_delta_grid,
    optimal_delta,
)
from .errors import ConfigError, SphereBuckleError
from .spectrum import CapDomain
from .solver import coordinate_split_residuals, solve_cap

__all__ = [
    "CampaignConfig",
    "CampaignReport",
    "CaseResult",
    "run_campaign",
    "report_to_json",
    "report_to_csv",
    "CAMPAIGN_CSV_COLUMNS",
]

CAMPAIGN_CSV_COLUMNS = (
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

# Residual contract for the energy-split identity on computed pairs.
IDENTITY_BOUND = 1e-8

STANDARD_DIMS = (2, 3, 4)
STANDARD_APERTURES = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)


@dataclass(frozen=True)
class CampaignConfig:
    """Validated campaign parameters; defaults give the standard campaign."""

    dims: tuple[int, ...] = STANDARD_DIMS
    apertures: tuple[float, ...] = STANDARD_APERTURES
    k_max: int = 10
    N0: int = 128
    max_refinements: int = 8
    grid_rel_tol: float = 1e-6
    delta_min: float = 1e-2
    delta_max: float = 1e2
    delta_points: int = 50
    rel_slack_tol: float = 1e-8
    output_path: str | None = None
    output_format: str = "json"

    def __post_init__(self) -> None:
        if not self.dims or any((not isinstance(n, int)) or n < 2 for n in self.dims):
            raise ConfigError(f"dims must be integers >= 2, got {self.dims!r}")
        if not self.apertures or any(
            not 0.0 < t < math.pi for t in self.apertures
        ):
            raise ConfigError(
                f"apertures must lie strictly inside (0, pi), got {self.apertures!r}"
            )
        if self.k_max < 1:
            raise ConfigError(f"k_max must be >= 1, got {self.k_max}")
        if self.N0 < 16 or self.max_refinements < 1:
            raise ConfigError(
                f"grid needs N0 >= 16 and max_refinements >= 1, "
                f"got N0={self.N0}, max_refinements={self.max_refinements}"
            )
        if not self.grid_rel_tol > 0.0:
            raise ConfigError(f"grid rel_tol must be positive, got {self.grid_rel_tol}")
        if not (0.0 < self.delta_min < self.delta_max) or self.delta_points < 1:
            raise ConfigError(
                f"delta grid needs 0 < min < max and points >= 1, got "
                f"({self.delta_min}, {self.delta_max}, {self.delta_points})"
            )
        if not self.rel_slack_tol > 0.0:
            raise ConfigError(
                f"rel_slack_tol must be positive, got {self.rel_slack_tol}"
            )
        if self.output_format not in ("json", "csv"):
            raise ConfigError(f"output format must be json or csv, got {self.output_format!r}")

    @staticmethod
    def from_dict(doc: dict[str, Any]) -> "CampaignConfig":
        if not isinstance(doc, dict):
            raise ConfigError(f"config must be a JSON object, got {type(doc).__name__}")
        known = {
            "dims",
            "apertures",
            "k_max",
            "grid",
            "delta_grid",
            "rel_slack_tol",
            "output",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs: dict[str, Any] = {}
        try:
            if "dims" in doc:
                kwargs["dims"] = tuple(int(n) for n in doc["dims"])
            if "apertures" in doc:
                kwargs["apertures"] = tuple(float(t) for t in doc["apertures"])
            if "k_max" in doc:
                kwargs["k_max"] = int(doc["k_max"])
            grid = doc.get("grid", {})
            if "N0" in grid:
                kwargs["N0"] = int(grid["N0"])
            if "max_refinements" in grid:
                kwargs["max_refinements"] = int(grid["max_refinements"])
            if "rel_tol" in grid:
                kwargs["grid_rel_tol"] = float(grid["rel_tol"])
            dg = doc.get("delta_grid", {})
            if "min" in dg:
                kwargs["delta_min"] = float(dg["min"])
            if "max" in dg:
                kwargs["delta_max"] = float(dg["max"])
            if "points" in dg:
                kwargs["delta_points"] = int(dg["points"])
            if "rel_slack_tol" in doc:
                kwargs["rel_slack_tol"] = float(doc["rel_slack_tol"])
            out = doc.get("output", {})
            if "path" in out:
                kwargs["output_path"] = str(out["path"])
            if "format" in out:
                kwargs["output_format"] = str(out["format"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config value: {exc}") from exc
        return CampaignConfig(**kwargs)

    @staticmethod
    def from_file(path: str) -> "CampaignConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
        return CampaignConfig.from_dict(doc)

    def delta_grid(self) -> list[float]:
        return default_delta_grid(self.delta_min, self.delta_max, self.delta_points)


@dataclass(frozen=True)
class CaseResult:
    """Everything recorded for one (n, theta0) cell of the campaign."""

    n: int
    theta0: float
    eigenvalues: tuple[float, ...] = ()
    meta: dict[str, Any] = field(default_factory=dict)
    reports: tuple[BoundReport, ...] = ()
    checks: tuple[dict[str, Any], ...] = ()
    lemma21_margin: float | None = None
    identity_residuals: tuple[float, float] | None = None
    delta_star: dict[int, float] = field(default_factory=dict)
    dominance_min: dict[int, float] = field(default_factory=dict)
    error: str | None = None
    error_type: str | None = None


@dataclass(frozen=True)
class CampaignReport:
    config: CampaignConfig
    cases: tuple[CaseResult, ...]
    summary: dict[str, Any]

    @property
    def failures(self) -> int:
        return int(self.summary["failures"])


def _norm_scale(lhs: float, rhs: float) -> float:
    return max(abs(lhs), abs(rhs), 1.0)


def _status(rec: CheckRecord, solver_rel_tol: float) -> str:
    if rec.holds:
        return "ok"
    if abs(rec.slack) < 10.0 * solver_rel_tol * abs(rec.rhs):
        return "inconclusive — refine grid"
    return "violated"


def _check_dict(
    rec: CheckRecord, k: int | None, solver_rel_tol: float
) -> dict[str, Any]:
    return {
        "k": k,
        "inequality_id": rec.inequality_id,
        "lhs": rec.lhs,
        "rhs": rec.rhs,
        "slack": rec.slack,
        "holds": rec.holds,
        "delta": rec.delta,
        "status": _status(rec, solver_rel_tol),
    }


def run_case(cfg: CampaignConfig, n: int, theta0: float) -> CaseResult:
    """Solve one cap and evaluate the full check battery on it."""
    domain = CapDomain(n, theta0)
    try:
        spectrum, pairs = solve_cap(
            domain,
            cfg.k_max,
            N0=cfg.N0,
            max_refinements=cfg.max_refinements,
            rel_tol=cfg.grid_rel_tol,
        )
    except SphereBuckleError as exc:
        return CaseResult(
            n=n,
            theta0=theta0,
            error=str(exc),
            error_type=type(exc).__name__,
        )
    tol = cfg.rel_slack_tol
    grid = cfg.delta_grid()
    case_meta = {
        "N": spectrum.meta.get("N"),
        "order": spectrum.meta.get("order"),
    }
    reports: list[BoundReport] = []
    checks: list[dict[str, Any]] = []
    delta_star: dict[int, float] = {}
    dominance_min: dict[int, float] = {}

    # First-eigenvalue floor: the whole sphere's value is the infimum
    # over caps, so every cap must sit above the dimension.
    lemma = CheckRecord.make("lemma21", float(n), spectrum.values[0], tol)
    checks.append(_check_dict(lemma, None, cfg.grid_rel_tol))

    # Energy-split identity on the first axisymmetric pair.
    first_axi = next((p for p in pairs if p.m == 0), None)
    identity_res: tuple[float, float] | None = None
    if first_axi is not None:
        ra, rb = coordinate_split_residuals(first_axi, domain)
        identity_res = (ra, rb)
        for label, res in (("identity28a", ra), ("identity28b", rb)):
            rec = CheckRecord.make(label, res, IDENTITY_BOUND, tol)
            checks.append(_check_dict(rec, None, cfg.grid_rel_tol))

    for k in range(1, cfg.k_max):
        lam_next = spectrum.values[k]
        rep = build_report(
            spectrum,
            k,
            lambda_next=lam_next,
            delta_grid=grid,
            rel_tol=tol,
            theta0=theta0,
            meta=case_meta,
        )
        reports.append(rep)
        for rec in rep.checks:
            checks.append(_check_dict(rec, k, cfg.grid_rel_tol))
        dominance_min[k] = min(
            rec.slack for rec in rep.checks if rec.inequality_id == "dominance"
        )
        ds, minimized = optimal_delta(spectrum, k, lam_next)
        delta_star[k] = ds
        thm_rhs = check_theorem(spectrum, k, lam_next, tol).rhs
        slack = thm_rhs - minimized
        agree = abs(slack) <= tol * _norm_scale(minimized, thm_rhs)
        checks.append(
            {
                "k": k,
                "inequality_id": "deltastar",
                "lhs": minimized,
                "rhs": thm_rhs,
                "slack": slack,
                "holds": agree,
                "delta": ds,
                "status": "ok" if agree else "violated",
            }
        )

    return CaseResult(
        n=n,
        theta0=theta0,
        eigenvalues=spectrum.values,
        meta=dict(spectrum.meta),
        reports=tuple(reports),
        checks=tuple(checks),
        lemma21_margin=spectrum.values[0] - n,
        identity_residuals=identity_res,
        delta_star=delta_star,
        dominance_min=dominance_min,
    )


def _run_case_args(args: tuple[CampaignConfig, int, float]) -> CaseResult:
    return run_case(*args)


def run_campaign(cfg: CampaignConfig, jobs: int = 1) -> CampaignReport:
    """Run every (n, theta0) case and assemble the ordered report.

    Cases are independent; with jobs > 1 they run in separate processes
    and are merged in the same deterministic order as a serial run. Solver
    failures are recorded per case without stopping the campaign.
    """
    cells = [(n, t) for n in sorted(cfg.dims) for t in sorted(cfg.apertures)]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(cells))) as pool:
            results = list(pool.map(_run_case_args, [(cfg, n, t) for n, t in cells]))
    else:
        results = [run_case(cfg, n, t) for n, t in cells]

    total = 0
    failures = 0
    inconclusive = 0
    errors = 0
    worst: dict[str, Any] | None = None
    for case in results:
        if case.error is not None:
            errors += 1
            continue
        for c in case.checks:
            total += 1
            if not c["holds"]:
                failures += 1
                if c["status"].startswith("inconclusive"):
                    inconclusive += 1
            rel = c["slack"] / _norm_scale(c["lhs"], c["rhs"])
            if worst is None or rel < worst["rel_slack"]:
                worst = {
                    "rel_slack": rel,
                    "slack": c["slack"],
                    "n": case.n,
                    "theta0": case.theta0,
                    "k": c["k"],
                    "inequality_id": c["inequality_id"],
                }
    summary = {
        "cases": len(results),
        "case_errors": errors,
        "total_checks": total,
        "failures": failures,
        "inconclusive": inconclusive,
        "worst": worst,
    }
    return CampaignReport(config=cfg, cases=tuple(results), summary=summary)


def _config_doc(cfg: CampaignConfig) -> dict[str, Any]:
    return {
        "dims": list(cfg.dims),
        "apertures": list(cfg.apertures),
        "k_max": cfg.k_max,
        "grid": {
            "N0": cfg.N0,
            "max_refinements": cfg.max_refinements,
            "rel_tol": cfg.grid_rel_tol,
        },
        "delta_grid": {
            "min": cfg.delta_min,
            "max": cfg.delta_max,
            "points": cfg.delta_points,
        },
        "rel_slack_tol": cfg.rel_slack_tol,
    }


def report_to_json(report: CampaignReport, timestamp: bool = True) -> str:
    """Full report document; the timestamp is the only nondeterministic field."""
    doc: dict[str, Any] = {
        "config": _config_doc(report.config),
        "summary": report.summary,
        "cases": [
            {
                "n": case.n,
                "theta0": case.theta0,
                "eigenvalues": list(case.eigenvalues),
                "meta": case.meta,
                "bounds": [
                    {
                        "k": rep.k,
                        "S": rep.S,
                        "T": rep.T,
                        "upper_next": rep.upper_next,
                        "gap_upper": rep.gap_upper,
                        "lower_prev": rep.lower_prev,
                        "delta_star": rep.delta_star,
                    }
                    for rep in case.reports
                ],
                "lemma21_margin": case.lemma21_margin,
                "identity_residuals": (
                    None
                    if case.identity_residuals is None
                    else list(case.identity_residuals)
                ),
                "delta_star": {str(k): v for k, v in sorted(case.delta_star.items())},
                "dominance_min": {
                    str(k): v for k, v in sorted(case.dominance_min.items())
                },
                "checks": list(case.checks),
                "error": case.error,
                "error_type": case.error_type,
            }
            for case in report.cases
        ],
    }
    if timestamp:
        doc["generated_at"] = datetime.now(timezone.utc).isoformat()
    return json.dumps(doc, indent=2)


def _case_order_scalar(meta: dict[str, Any]) -> float | str:
    orders = [o for o in meta.get("order") or [] if o is not None]
    if not orders:
        return ""
    orders = sorted(orders)
    mid = len(orders) // 2
    if len(orders) % 2:
        return orders[mid]
    return 0.5 * (orders[mid - 1] + orders[mid])


def report_to_csv(report: CampaignReport) -> str:
    """Flat check rows under the fixed columns, deterministically ordered."""
    rows: list[dict[str, Any]] = []
    for case in report.cases:
        if case.error is not None:
            continue
        order_scalar = _case_order_scalar(case.meta)
        for c in case.checks:
            rows.append(
                {
                    "n": case.n,
                    "theta0": f"{case.theta0:.17g}",
                    "k": "" if c["k"] is None else c["k"],
                    "inequality_id": c["inequality_id"],
                    "lhs": f"{c['lhs']:.17g}",
                    "rhs": f"{c['rhs']:.17g}",
                    "slack": f"{c['slack']:.17g}",
                    "holds": str(c["holds"]).lower(),
                    "delta": "" if c["delta"] is None else f"{c['delta']:.17g}",
                    "meta_N": case.meta.get("N", ""),
                    "meta_order": order_scalar
                    if order_scalar == ""
                    else f"{order_scalar:.6g}",
                }
            )
    rows.sort(
        key=lambda r: (
            r["n"],
            float(r["theta0"]),
            -1 if r["k"] == "" else int(r["k"]),
            r["inequality_id"],
            float(r["delta"]) if r["delta"] != "" else -1.0,
        )
    )
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(CAMPAIGN_CSV_COLUMNS), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()

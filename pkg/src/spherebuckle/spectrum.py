"""Domain and spectrum types plus multiplicity bookkeeping.

A buckling spectrum on a geodesic cap decomposes over azimuthal modes: each
degree-m spherical-harmonic channel contributes a 1D radial spectrum, and
every radial eigenvalue enters the full spectrum with the multiplicity of
degree-m harmonics on the boundary sphere. The helpers here validate
spectra, expand multiplicities, and (de)serialize spectrum files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb, pi
from typing import Any, Iterable, Mapping, Sequence

from .errors import InsufficientModes, InvalidInput, NonPositive, SingularTerm, Unsorted

__all__ = [
    "CapDomain",
    "Spectrum",
    "EigenPair",
    "ValidationResult",
    "validate_spectrum",
    "harmonic_multiplicity",
    "merge_modes",
    "spectrum_to_json",
    "spectrum_from_json",
    "save_spectrum",
    "load_spectrum",
]


@dataclass(frozen=True)
class CapDomain:
    """Geodesic cap {theta <= theta0} on the unit sphere S^n."""

    n: int
    theta0: float

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 2:
            raise InvalidInput(f"ambient dimension must be an integer >= 2, got {self.n!r}")
        if not (0.0 < self.theta0 < pi):
            raise InvalidInput(f"aperture must lie in (0, pi), got {self.theta0!r}")


@dataclass(frozen=True)
class Spectrum:
    """Ordered eigenvalues with multiplicities expanded, plus provenance."""

    n: int
    values: tuple[float, ...]
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class EigenPair:
    """One radial eigenpair: eigenvalue, azimuthal index, profile samples.

    The profile is f(theta) at the cell centers, normalized so the discrete
    Dirichlet form (the B quadratic form of its mode system) equals 1.
    """

    value: float
    m: int
    theta: tuple[float, ...]
    profile: tuple[float, ...]


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of validate_spectrum: hard errors plus a soft warning flag."""

    errors: tuple[Exception, ...]
    warn_below_n: bool

    @property
    def valid(self) -> bool:
        return not self.errors


def validate_spectrum(s: Spectrum) -> ValidationResult:
    """Check ordering, positivity and the lambda > n - 2 domain condition.

    A first value below n is only flagged, not rejected: user-supplied
    spectra may be hypothetical, and every bound formula remains well
    defined on lambda > n - 2.
    """
    errors: list[Exception] = []
    vals = s.values
    if not vals:
        errors.append(NonPositive("spectrum is empty"))
        return ValidationResult(tuple(errors), False)
    if any(b < a for a, b in zip(vals, vals[1:])):
        errors.append(Unsorted(f"values not nondecreasing: {vals}"))
    if any(v <= 0.0 for v in vals):
        errors.append(NonPositive(f"values must be strictly positive: {vals}"))
    floor = s.n - 2
    if any(v <= floor for v in vals):
        errors.append(SingularTerm(f"every value must exceed n - 2 = {floor}: {vals}"))
    warn = vals[0] < s.n
    return ValidationResult(tuple(errors), warn)


def harmonic_multiplicity(n: int, m: int) -> int:
    """Dimension of degree-m spherical harmonics on S^(n-1).

    Equals 1 for m = 0 and C(m+d, d) - C(m+d-2, d) with d = n - 1 otherwise
    (a binomial with negative upper argument counts as zero).
    """
    if n < 2 or m < 0:
        raise InvalidInput(f"need n >= 2 and m >= 0, got n={n}, m={m}")
    if m == 0:
        return 1
    d = n - 1
    first = comb(m + d, d)
    second = comb(m + d - 2, d) if m + d - 2 >= d else 0
    return first - second


def merge_modes(
    mode_lists: Iterable[tuple[int, Sequence[float]]] | Mapping[int, Sequence[float]],
    n: int,
    k: int,
    meta: dict[str, Any] | None = None,
) -> Spectrum:
    """Expand per-mode eigenvalues by harmonic multiplicity and take the k smallest.

    Accepts (m, values) pairs or a mapping m -> values. Ties are preserved
    exactly; no de-duplication tolerance is applied.
    """
    if k < 1:
        raise InvalidInput(f"k must be >= 1, got {k}")
    if isinstance(mode_lists, Mapping):
        mode_lists = mode_lists.items()
    expanded: list[float] = []
    for m, vals in mode_lists:
        mult = harmonic_multiplicity(n, m)
        prev = None
        for v in vals:
            v = float(v)
            if prev is not None and v < prev:
                raise Unsorted(f"mode {m} eigenvalue list not nondecreasing")
            prev = v
            expanded.extend([v] * mult)
    if len(expanded) < k:
        raise InsufficientModes(
            f"only {len(expanded)} expanded values available, need {k}"
        )
    expanded.sort()
    return Spectrum(n=n, values=tuple(expanded[:k]), meta=dict(meta or {}))


def _format_float(v: float) -> float:
    # Round-trip through 17 significant digits; exact for binary64.
    return float(f"{v:.17g}")


def spectrum_to_json(s: Spectrum, domain: CapDomain | None = None) -> str:
    doc = {
        "n": s.n,
        "domain": None
        if domain is None
        else {"type": "cap", "theta0": _format_float(domain.theta0)},
        "eigenvalues": [_format_float(v) for v in s.values],
        "meta": s.meta,
    }
    return json.dumps(doc, indent=2, sort_keys=False)


def spectrum_from_json(text: str) -> tuple[Spectrum, CapDomain | None]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"not valid JSON: {exc}") from exc
    try:
        n = int(doc["n"])
        values = tuple(float(v) for v in doc["eigenvalues"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed spectrum document: {exc}") from exc
    meta = doc.get("meta") or {}
    dom_doc = doc.get("domain")
    domain = None
    if dom_doc is not None:
        if dom_doc.get("type") != "cap":
            raise InvalidInput(f"unknown domain type {dom_doc.get('type')!r}")
        domain = CapDomain(n=n, theta0=float(dom_doc["theta0"]))
    return Spectrum(n=n, values=values, meta=meta), domain


def save_spectrum(path: str, s: Spectrum, domain: CapDomain | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(spectrum_to_json(s, domain))
        fh.write("\n")


def load_spectrum(path: str) -> tuple[Spectrum, CapDomain | None]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidInput(f"cannot read spectrum file {path!r}: {exc}") from exc
    return spectrum_from_json(text)

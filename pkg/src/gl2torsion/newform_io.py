"""Weight-2 newform records: dataset file format, validation, Sturm bound."""
from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable

from .arith import prime_divisors, primes_up_to
from .numfield import FieldElement, InvalidFieldError, NumberField, norm

BUNDLED_DATASET = "newforms_wt2.jsonl"

FIELDS = ("label", "level", "weight", "char_trivial", "dimension", "field_poly", "eigenvalues", "data_bound")


class EmptyDatasetError(ValueError):
    pass


class MissingDataError(KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "missing data"


class DegenerateLevelWarning(UserWarning):
    pass


@dataclass(frozen=True)
class NewformRecord:
    label: str
    level: int
    weight: int
    char_trivial: bool
    dimension: int
    field_poly: tuple
    # p -> (power-basis numerator coordinates, positive denominator)
    eigenvalues: dict = field(compare=True, hash=False)
    data_bound: int

    @cached_property
    def field(self) -> NumberField:
        return NumberField(self.field_poly)

    def ap(self, p: int) -> FieldElement:
        try:
            num, den = self.eigenvalues[p]
        except KeyError:
            raise MissingDataError(f"{self.label}: no eigenvalue a_{p}") from None
        return self.field.element(num, den)

    def sort_key(self):
        return (self.level, self.label)


@dataclass(frozen=True)
class Diagnostic:
    line: int
    label: str | None
    message: str

    def __str__(self):
        where = f"line {self.line}" + (f" ({self.label})" if self.label else "")
        return f"{where}: {self.message}"


@dataclass
class DatasetManifest:
    source: str
    record_count: int
    per_dimension: dict
    data_bound_policy: str = "max(2*sturm_bound(N, 2), 100)"

    @classmethod
    def of(cls, records, source: str) -> "DatasetManifest":
        dims = Counter(r.dimension for r in records)
        return cls(source, len(records), dict(sorted(dims.items())))

    def summary(self) -> str:
        dims = " ".join(f"g={g}:{n}" for g, n in self.per_dimension.items())
        return f"source={self.source} records={self.record_count} {dims} data_bound={self.data_bound_policy}"


# ---------------------------------------------------------------------------
# Sturm bound


def gamma0_index(N: int) -> int:
    mu = N
    for p in prime_divisors(N):
        mu = mu // p * (p + 1)
    return mu


def sturm_bound(N: int, k: int = 2) -> int:
    """floor(k * [SL2(Z) : Gamma0(N)] / 12), promoted to 1 when it is 0."""
    if N < 1:
        raise ValueError(f"level must be positive, got {N}")
    b = k * gamma0_index(N) // 12
    if b == 0:
        warnings.warn(f"Sturm bound for level {N}, weight {k} is 0; using 1", DegenerateLevelWarning, stacklevel=2)
        return 1
    return b


def data_bound_for(level: int) -> int:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateLevelWarning)
        return max(2 * sturm_bound(level, 2), 100)


# ---------------------------------------------------------------------------
# file format


def _record_from_dict(d: dict) -> NewformRecord:
    missing = [k for k in FIELDS if k not in d]
    if missing:
        raise ValueError(f"missing fields {', '.join(missing)}")
    if d["weight"] != 2:
        raise ValueError(f"unsupported weight {d['weight']}")
    if d["char_trivial"] is not True:
        raise ValueError("unsupported non-trivial character")
    g = d["dimension"]
    if not isinstance(g, int) or g < 1:
        raise ValueError(f"bad dimension {g!r}")
    poly = tuple(d["field_poly"])
    if len(poly) != g + 1 or not all(isinstance(c, int) for c in poly):
        raise ValueError("field_poly length does not match dimension")
    if poly[-1] != 1:
        raise ValueError("field_poly is not monic")
    if not isinstance(d["level"], int) or d["level"] < 1:
        raise ValueError(f"bad level {d['level']!r}")
    eig = {}
    for entry in d["eigenvalues"]:
        p, num, den = entry["p"], entry["num"], entry["den"]
        if len(num) != g:
            raise ValueError(f"coordinate length mismatch at p={p}: {len(num)} != {g}")
        if not isinstance(den, int) or den <= 0:
            raise ValueError(f"non-positive denominator at p={p}")
        if p in eig:
            raise ValueError(f"duplicate eigenvalue for p={p}")
        eig[p] = (tuple(num), den)
    absent = [p for p in primes_up_to(d["data_bound"]) if p not in eig]
    if absent:
        raise ValueError(f"missing eigenvalues for primes {','.join(map(str, absent[:10]))}")
    return NewformRecord(
        label=d["label"],
        level=d["level"],
        weight=2,
        char_trivial=True,
        dimension=g,
        field_poly=poly,
        eigenvalues=dict(sorted(eig.items())),
        data_bound=d["data_bound"],
    )


def parse_dataset(lines: Iterable[str]) -> tuple[list[NewformRecord], list[Diagnostic]]:
    """Parse dataset lines. Bad lines become diagnostics; records come back sorted by (level, label)."""
    records, diags = [], []
    for i, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        label = None
        try:
            d = json.loads(line)
            if not isinstance(d, dict):
                raise ValueError("record is not an object")
            label = d.get("label")
            records.append(_record_from_dict(d))
        except ValueError as exc:
            diags.append(Diagnostic(i, label, str(exc)))
        except (KeyError, TypeError) as exc:
            diags.append(Diagnostic(i, label, f"malformed record: {exc!r}"))
    if not records:
        raise EmptyDatasetError("dataset contains no valid records")
    records.sort(key=NewformRecord.sort_key)
    return records, diags


def load_dataset(path: str | Path | None = None) -> tuple[list[NewformRecord], list[Diagnostic]]:
    if path is None:
        with resources.files("gl2torsion.data").joinpath(BUNDLED_DATASET).open("r", encoding="utf-8") as fh:
            return parse_dataset(fh)
    with open(path, "r", encoding="utf-8") as fh:
        return parse_dataset(fh)


def record_to_dict(r: NewformRecord) -> dict:
    return {
        "label": r.label,
        "level": r.level,
        "weight": r.weight,
        "char_trivial": r.char_trivial,
        "dimension": r.dimension,
        "field_poly": list(r.field_poly),
        "eigenvalues": [{"p": p, "num": list(num), "den": den} for p, (num, den) in sorted(r.eigenvalues.items())],
        "data_bound": r.data_bound,
    }


def serialize_record_dict(d: dict) -> str:
    d = {k: d[k] for k in FIELDS}
    d["eigenvalues"] = sorted(d["eigenvalues"], key=lambda e: e["p"])
    d["eigenvalues"] = [{"p": e["p"], "num": list(e["num"]), "den": e["den"]} for e in d["eigenvalues"]]
    return json.dumps(d, separators=(",", ":"), ensure_ascii=False)


def serialize_record(r: NewformRecord) -> str:
    return serialize_record_dict(record_to_dict(r))


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    label: str
    missing_primes: list = field(default_factory=list)
    positivity_violations: list = field(default_factory=list)
    squarefree: bool = True

    @property
    def ok(self) -> bool:
        return not self.missing_primes and not self.positivity_violations and self.squarefree

    def messages(self) -> list[str]:
        out = []
        if self.missing_primes:
            out.append("missing primes " + ",".join(map(str, self.missing_primes)))
        if self.positivity_violations:
            out.append("Norm(1 - a_p + p) <= 0 at p=" + ",".join(map(str, self.positivity_violations)))
        if not self.squarefree:
            out.append("field_poly is not squarefree")
        return out


def validate_record(r: NewformRecord, required_bound: int) -> ValidationReport:
    report = ValidationReport(r.label)
    report.missing_primes = [p for p in primes_up_to(required_bound) if p not in r.eigenvalues]
    try:
        K = r.field
    except InvalidFieldError:
        report.squarefree = False
        return report
    for p in r.eigenvalues:
        P = K.from_rational(1 + p) - r.ap(p)
        if norm(K, P) <= 0:
            report.positivity_violations.append(p)
    return report

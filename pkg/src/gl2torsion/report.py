"""Rendering analyses and surveys as text tables, CSV and JSON lines."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

from .engine import SurveyTables, TorsionAnalysis

CSV_HEADER = ["label", "level", "dim", "bound", "G", "T", "sharp", "stabilized"]
FORMATS = ("text", "csv", "structured")


@dataclass
class EllRecord:
    ell: int
    unresolved: bool
    entries: list  # [{"e", "f", "n"}]
    predicted_exponent: int
    gcd_exponent: int


@dataclass
class ReportRecord:
    label: str
    level: int
    dimension: int
    bound: int
    G: int
    T: int
    sharp: object  # True | False | "unknown"
    stabilization: object  # True | False | None
    ells: list = field(default_factory=list)

    @classmethod
    def from_analysis(cls, a: TorsionAnalysis) -> "ReportRecord":
        sharp = a.sharp
        return cls(
            label=a.label,
            level=a.level,
            dimension=a.dimension,
            bound=a.bound,
            G=a.G,
            T=a.T,
            sharp="unknown" if sharp is None else sharp,
            stabilization=a.stabilization,
            ells=[
                EllRecord(
                    r.ell,
                    r.unresolved,
                    [{"e": x.e, "f": x.f, "n": x.n} for x in r.entries],
                    r.predicted_exponent,
                    r.gcd_exponent,
                )
                for r in a.reports
            ],
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "ReportRecord":
        d = json.loads(line)
        d["ells"] = [EllRecord(**e) for e in d["ells"]]
        return cls(**d)


def _fmt_flag(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _ell_summary(rec: ReportRecord) -> str:
    parts = []
    for e in rec.ells:
        lams = ",".join(f"(e{x['e']}f{x['f']}n{x['n']})" for x in e.entries) or "unresolved"
        parts.append(f"{e.ell}^{e.predicted_exponent}/{e.gcd_exponent}:{lams}")
    return " ".join(parts) or "-"


def render(records: list[ReportRecord], fmt: str = "text") -> str:
    if fmt == "structured":
        return "".join(r.to_json() + "\n" for r in records)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow([r.label, r.level, r.dimension, r.bound, r.G, r.T, _fmt_flag(r.sharp), _fmt_flag(r.stabilization)])
        return buf.getvalue()
    if fmt == "text":
        rows = [CSV_HEADER + ["ell^pred/gcd:(e,f,n)"]]
        for r in records:
            rows.append([r.label, str(r.level), str(r.dimension), str(r.bound), str(r.G), str(r.T),
                         _fmt_flag(r.sharp), _fmt_flag(r.stabilization), _ell_summary(r)])
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]) - 1)]
        lines = []
        for row in rows:
            cells = [c.ljust(w) for c, w in zip(row, widths)] + [row[-1]]
            lines.append("  ".join(cells).rstrip())
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def parse_reports(text: str) -> list[ReportRecord]:
    return [ReportRecord.from_json(line) for line in text.splitlines() if line.strip()]


def _join(xs) -> str:
    return " ".join(map(str, xs))


def render_survey(tables: SurveyTables, fmt: str = "text") -> str:
    records = [ReportRecord.from_analysis(a) for a in tables.analyses]
    if fmt in ("csv", "structured"):
        return render(records, fmt)
    lines = [
        f"dimension: {tables.dimension}",
        f"max level: {tables.max_level}",
        f"newforms: {len(tables.analyses)}",
        f"torsion orders: {_join(tables.orders)}",
        f"sharp orders: {_join(tables.sharp_orders)}",
        f"primes: {_join(tables.primes)}",
        f"divisor closure: {_join(tables.divisor_closure)}",
        f"sharp count: {tables.sharp_count}/{len(tables.analyses)}",
        f"unresolved: {_join(tables.unresolved) or '-'}",
        f"unstable gcd (bound vs 2*bound): {_join(tables.unstable) or '-'}",
        f"divisibility violations: {_join(tables.violations) or '-'}",
    ]
    return "\n".join(lines) + "\n"

"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data/validation error,
3 fetch error, 4 internal-consistency error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass

from . import engine, report
from .engine import EngineConfig
from .lmfdb import FetchError, LmfdbClient, default_cache_dir
from .newform_io import (
    DatasetManifest,
    EmptyDatasetError,
    MissingDataError,
    load_dataset,
    serialize_record,
    validate_record,
)
from .numfield import InternalConsistencyError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FETCH, EXIT_INTERNAL = 0, 1, 2, 3, 4

log = logging.getLogger("gl2torsion")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    data: str | None = None
    cache_dir: str | None = None
    label: str | None = None
    levels: tuple | None = None
    dims: tuple | None = None
    dim: int | None = None
    max_level: int | None = None
    prime_bound: str = "auto"
    include_p2: bool = False
    format: str = "text"
    seed: int = 0
    workers: int = 1
    offline: bool = False
    output: str | None = None
    exclude_ell: bool = False

    def __post_init__(self):
        if self.command == "analyze" and not self.label:
            raise UsageError("analyze requires --label")
        if self.command == "survey" and self.dim is None:
            raise UsageError("survey requires --dim")
        if self.command == "fetch" and not (self.label or self.levels):
            raise UsageError("fetch requires --label or --levels")
        if self.prime_bound != "auto":
            try:
                if int(self.prime_bound) < 2:
                    raise ValueError
            except ValueError:
                raise UsageError(f"--prime-bound must be 'auto' or an integer >= 2, got {self.prime_bound!r}")

    @property
    def bound(self):
        return "auto" if self.prime_bound == "auto" else int(self.prime_bound)

    @property
    def engine_config(self) -> EngineConfig:
        return EngineConfig(include_p2=self.include_p2, seed=self.seed, exclude_ell=self.exclude_ell)


def _range(text: str) -> tuple[int, int]:
    a, _, b = text.partition("-")
    lo = int(a)
    hi = int(b) if b else lo
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text}")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--data", help="dataset file (JSON lines); default: bundled dataset")
    common.add_argument("--cache-dir", help="LMFDB response cache (overrides $GL2TORSION_CACHE)")
    common.add_argument("--format", choices=report.FORMATS, default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="gl2torsion", description="Predicted torsion orders of modular abelian varieties over Q.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("fetch", parents=[common], help="fetch newforms from LMFDB into the cache")
    f.add_argument("--label")
    f.add_argument("--levels", type=_range, help="level range, e.g. 1-500")
    f.add_argument("--dims", type=_range, default=(1, 6))
    f.add_argument("--offline", action="store_true", help="serve from cache only")
    f.add_argument("-o", "--output", help="write fetched records as a dataset file")

    v = sub.add_parser("validate", parents=[common], help="validate dataset records")
    v.add_argument("--label")
    v.add_argument("--prime-bound", default="auto", help="'auto' (data bound policy) or an integer")

    for name, helptext in (("analyze", "analyze one newform"), ("survey", "tabulate one dimension")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--prime-bound", default="auto")
        s.add_argument("--include-p2", action="store_true")
        s.add_argument("--exclude-ell", action="store_true", help="drop p = ell from each ell-window")
        if name == "analyze":
            s.add_argument("--label", required=True)
        else:
            s.add_argument("--dim", type=int, required=True)
            s.add_argument("--max-level", type=int, default=500)
            s.add_argument("--workers", type=int, default=1)
    return p


def parse_config(argv) -> tuple[RunConfig, bool]:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(
        command=ns.command,
        data=ns.data,
        cache_dir=ns.cache_dir,
        label=getattr(ns, "label", None),
        levels=getattr(ns, "levels", None),
        dims=getattr(ns, "dims", None),
        dim=getattr(ns, "dim", None),
        max_level=getattr(ns, "max_level", None),
        prime_bound=getattr(ns, "prime_bound", "auto"),
        include_p2=getattr(ns, "include_p2", False),
        format=ns.format,
        seed=ns.seed,
        workers=getattr(ns, "workers", 1),
        offline=getattr(ns, "offline", False),
        output=getattr(ns, "output", None),
        exclude_ell=getattr(ns, "exclude_ell", False),
    )
    return cfg, ns.verbose


def _records(cfg: RunConfig):
    records, diags = load_dataset(cfg.data)
    for d in diags:
        log.warning("%s", d)
    return records


def _find(records, label):
    for r in records:
        if r.label == label:
            return r
    raise MissingDataError(f"{label}: record not found")


def run(cfg: RunConfig, out=None, client: LmfdbClient | None = None) -> int:
    out = out or sys.stdout
    if cfg.command == "fetch":
        client = client or LmfdbClient(default_cache_dir(cfg.cache_dir), offline=cfg.offline)
        if cfg.label:
            rec, diags = client.fetch_label(cfg.label)
            records = [rec] if rec else []
        else:
            records, diags = client.fetch(cfg.levels, cfg.dims)
        for d in diags:
            log.warning("%s", d)
        if cfg.output:
            with open(cfg.output, "w", encoding="utf-8") as fh:
                fh.writelines(serialize_record(r) + "\n" for r in records)
        out.write(DatasetManifest.of(records, "lmfdb-cache").summary() + "\n")
        if cfg.label and not records:
            log.error("%s: record not found", cfg.label)
            return EXIT_DATA
        return EXIT_OK

    records = _records(cfg)
    if cfg.command == "validate":
        chosen = [_find(records, cfg.label)] if cfg.label else records
        bad = 0
        for r in chosen:
            bound = r.data_bound if cfg.prime_bound == "auto" else int(cfg.prime_bound)
            rep = validate_record(r, bound)
            status = "ok" if rep.ok else "; ".join(rep.messages())
            bad += not rep.ok
            out.write(f"{r.label}: {status}\n")
        out.write(f"{len(chosen) - bad}/{len(chosen)} records valid\n")
        return EXIT_OK if bad == 0 else EXIT_DATA

    if cfg.command == "analyze":
        r = _find(records, cfg.label)
        a = engine.predicted_torsion_order(r, cfg.bound, cfg.engine_config)
        if a.unresolved:
            log.warning("%s: some ell unresolved (index divisible); T is a lower bound", r.label)
        out.write(report.render([report.ReportRecord.from_analysis(a)], cfg.format))
        return EXIT_OK

    if cfg.command == "survey":
        max_level = cfg.max_level if cfg.max_level is not None else 500
        tables = engine.survey(records, cfg.dim, max_level, cfg.bound, cfg.engine_config, cfg.workers)
        out.write(report.render_survey(tables, cfg.format))
        return EXIT_OK
    raise UsageError(f"unknown command {cfg.command}")


def main(argv=None) -> int:
    try:
        cfg, verbose = parse_config(argv)
    except UsageError as exc:
        print(f"gl2torsion: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s: %(message)s")
    try:
        return run(cfg)
    except FetchError as exc:
        print(f"gl2torsion: fetch error: {exc}", file=sys.stderr)
        return EXIT_FETCH
    except InternalConsistencyError as exc:
        print(f"gl2torsion: internal consistency error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (MissingDataError, EmptyDatasetError, engine.InvalidWindowError, engine.CorruptDataError, OSError, ValueError) as exc:
        print(f"gl2torsion: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

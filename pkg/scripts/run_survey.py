"""Tabulate predicted torsion orders for several dimensions at once.

    python scripts/run_survey.py --dims 2 3 --max-level 500 --out results/

Writes ``survey_g<dim>.txt`` (summary tables) and ``survey_g<dim>.csv``
(one row per newform) for each dimension.
"""
import argparse
import time
from pathlib import Path

from gl2torsion import report
from gl2torsion.engine import EngineConfig, survey
from gl2torsion.newform_io import load_dataset


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", help="dataset file; default: bundled dataset")
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--max-level", type=int, default=500)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--include-p2", action="store_true")
    ap.add_argument("--out", default="results")
    args = ap.parse_args(argv)

    records, diags = load_dataset(args.data)
    for d in diags:
        print("skipped:", d)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = EngineConfig(include_p2=args.include_p2)
    for dim in args.dims:
        t0 = time.perf_counter()
        tables = survey(records, dim, args.max_level, "auto", config, args.workers)
        text = report.render_survey(tables, "text")
        (out / f"survey_g{dim}.txt").write_text(text)
        (out / f"survey_g{dim}.csv").write_text(report.render_survey(tables, "csv"))
        print(text + f"({time.perf_counter() - t0:.1f}s)\n")


if __name__ == "__main__":
    main()

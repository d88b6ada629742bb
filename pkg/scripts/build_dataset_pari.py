"""Generate the bundled newform dataset with PARI/GP (via cypari2).

Writes one JSON record per Galois orbit of weight-2 trivial-character
newforms, in the dataset line format read by ``gl2torsion.newform_io``.
Coefficient fields are reduced with ``polredabs`` and orbits are labelled
the way LMFDB does it: sorted by dimension, then by the trace sequence.

    python scripts/build_dataset_pari.py --max-level 500 --max-dim 6 \
        -o src/gl2torsion/data/newforms_wt2.jsonl
"""
import argparse
import json
import sys
import time
from fractions import Fraction
from math import lcm

import cypari2

from gl2torsion.newform_io import data_bound_for, serialize_record_dict

pari = cypari2.Pari()
pari.allocatemem(4 * 10**9, silent=True)

TRACE_TERMS = 1000


def orbit_label(index):
    # LMFDB base-26 orbit letters: a..z, ba, bb, ...
    letters = ""
    while True:
        letters = chr(ord("a") + index % 26) + letters
        index //= 26
        if index == 0:
            return letters


def poly_coeffs(pol, var, degree):
    return [Fraction(int(c.numerator()), int(c.denominator()))
            for c in (pari.polcoef(pol, i, var) for i in range(degree))]


def orbit_data(form, field, level, max_dim):
    degree = int(pari.poldegree(field, "y"))
    if degree > max_dim:
        return None
    bound = data_bound_for(level)
    nterms = max(bound, TRACE_TERMS)
    coefs = pari.mfcoefs(form, nterms)
    if degree == 1:
        reduced, root = pari("x"), pari("0")
        values = [pari.lift(c) if pari.type(c) == "t_POLMOD" else c for c in coefs]
        values = [pari.substpol(v, "y", 0) if pari.type(v) == "t_POL" else v for v in values]
        traces = [int(v) for v in values[1:TRACE_TERMS + 1]]
        red_poly = [0, 1]
        to_red = lambda v: [Fraction(int(pari.numerator(v)), int(pari.denominator(v)))]
    else:
        red, rootmod = pari.polredabs(field, 1)
        red = pari.substpol(red, pari.variable(red), pari("y"))
        root = pari.subst(pari.lift(rootmod), pari.variable(pari.lift(rootmod)), pari("y"))
        red_poly = [int(pari.polcoef(red, i, "y")) for i in range(degree + 1)]

        def to_red(c):
            v = pari.lift(c) if pari.type(c) == "t_POLMOD" else c
            v = pari.Mod(pari.subst(v, "y", root), red)
            return poly_coeffs(pari.lift(v), "y", degree)

        traces = [int(pari.trace(pari.Mod(pari.lift(c) if pari.type(c) == "t_POLMOD" else c, field)))
                  for c in coefs[1:TRACE_TERMS + 1]]
    eigenvalues = []
    for p in pari.primes([2, bound]):
        p = int(p)
        vec = to_red(coefs[p])
        den = lcm(*(c.denominator for c in vec))
        eigenvalues.append({"p": p, "num": [int(c * den) for c in vec], "den": den})
    return {
        "degree": degree,
        "traces": traces,
        "field_poly": red_poly,
        "eigenvalues": eigenvalues,
        "data_bound": bound,
    }


def level_records(level, max_dim):
    mf = pari.mfinit([level, 2], 0)
    if int(pari.mfdim(mf)) == 0:
        return []
    fields = pari.mffields(mf)
    forms = pari.mfeigenbasis(mf)
    orbits = []
    for form, field in zip(forms, fields):
        degree = int(pari.poldegree(field, "y"))
        if degree > max_dim:
            # still needed for label ordering
            coefs = pari.mfcoefs(form, TRACE_TERMS)
            traces = [int(pari.trace(pari.Mod(pari.lift(c) if pari.type(c) == "t_POLMOD" else c, field)))
                      for c in coefs[1:]]
            orbits.append({"degree": degree, "traces": traces, "skip": True})
        else:
            orbits.append(orbit_data(form, field, level, max_dim))
    orbits.sort(key=lambda o: (o["degree"], o["traces"]))
    out = []
    for i, o in enumerate(orbits):
        if o.get("skip"):
            continue
        out.append({
            "label": f"{level}.2.a.{orbit_label(i)}",
            "level": level,
            "weight": 2,
            "char_trivial": True,
            "dimension": o["degree"],
            "field_poly": o["field_poly"],
            "eigenvalues": o["eigenvalues"],
            "data_bound": o["data_bound"],
        })
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-level", type=int, default=1)
    ap.add_argument("--max-level", type=int, default=500)
    ap.add_argument("--max-dim", type=int, default=6)
    ap.add_argument("-o", "--output", required=True)
    args = ap.parse_args(argv)
    t0 = time.time()
    n = 0
    with open(args.output, "w", encoding="utf-8") as fh:
        for level in range(args.min_level, args.max_level + 1):
            for rec in level_records(level, args.max_dim):
                fh.write(serialize_record_dict(rec) + "\n")
                n += 1
            if level % 25 == 0:
                print(f"level {level}: {n} records, {time.time() - t0:.0f}s", file=sys.stderr)
    print(f"wrote {n} records to {args.output}", file=sys.stderr)


if __name__ == "__main__":
    main()

"""LMFDB JSON API client with an on-disk response cache.

Raw response bodies are stored as ``<cache_dir>/<table>/<key>.json`` and
served from there on every later call, so a warm cache works offline and
returns byte-identical data.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import time
from fractions import Fraction
from math import lcm
from pathlib import Path

import requests

from .arith import primes_up_to
from .newform_io import Diagnostic, NewformRecord, _record_from_dict, data_bound_for

log = logging.getLogger(__name__)

API_ROOT = "https://www.lmfdb.org/api"
CACHE_ENV = "GL2TORSION_CACHE"
PAGE_SIZE = 100


class FetchError(RuntimeError):
    pass


def default_cache_dir(override=None) -> Path:
    """Cache root: explicit override (CLI flag), then $GL2TORSION_CACHE, then ~/.cache."""
    if override:
        return Path(override)
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "gl2torsion"


class LmfdbClient:
    def __init__(self, cache_dir=None, session=None, min_interval: float = 0.5, offline: bool = False,
                 api_root: str = API_ROOT, timeout: float = 30.0):
        self.cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
        self.session = session if session is not None else requests.Session()
        self.min_interval = min_interval
        self.offline = offline
        self.api_root = api_root.rstrip("/")
        self.timeout = timeout
        self._last_request = 0.0

    def _cache_path(self, table: str, key: str) -> Path:
        return self.cache_dir / table / f"{key}.json"

    def get(self, table: str, key: str, params: dict) -> dict:
        path = self._cache_path(table, key)
        if path.exists():
            return json.loads(path.read_bytes())
        if self.offline:
            raise FetchError(f"{table}/{key}: not cached and network disabled")
        wait = self.min_interval - (time.monotonic() - self._last_request)
        if wait > 0:
            time.sleep(wait)
        url = f"{self.api_root}/{table}/"
        try:
            resp = self.session.get(url, params=dict(params, _format="json"), timeout=self.timeout)
            self._last_request = time.monotonic()
            resp.raise_for_status()
            body = resp.content
            json.loads(body)
        except (requests.RequestException, ValueError) as exc:
            raise FetchError(f"{table}/{key}: {exc}") from exc
        path.parent.mkdir(parents=True, exist_ok=True)
        # atomic replace: concurrent writers of one key never expose a partial file
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        with os.fdopen(fd, "wb") as fh:
            fh.write(body)
        os.replace(tmp, path)
        return json.loads(body)

    def newform(self, label: str) -> dict | None:
        rows = self.get("mf_newforms", label, {"label": label}).get("data", [])
        return rows[0] if rows else None

    def hecke_nf(self, label: str) -> dict | None:
        rows = self.get("mf_hecke_nf", label, {"label": label}).get("data", [])
        return rows[0] if rows else None

    def search_labels(self, levels: tuple[int, int], dims: tuple[int, int]) -> list[str]:
        base = {
            "weight": "i2",
            "char_order": "i1",
            "level": "py" + json.dumps({"$gte": levels[0], "$lte": levels[1]}),
            "dim": "py" + json.dumps({"$gte": dims[0], "$lte": dims[1]}),
            "_fields": "label",
            "_sort": "level,label",
        }
        labels, offset = [], 0
        while True:
            params = dict(base, _offset=offset, _max_count=PAGE_SIZE)
            key = "query-" + hashlib.sha256(json.dumps(params, sort_keys=True).encode()).hexdigest()[:20]
            page = self.get("mf_newforms", key, params)
            rows = page.get("data", [])
            labels.extend(row["label"] for row in rows)
            if len(rows) < PAGE_SIZE or not page.get("next"):
                return labels
            offset += PAGE_SIZE

    def fetch_label(self, label: str) -> tuple[NewformRecord | None, list[Diagnostic]]:
        nf = self.newform(label)
        if nf is None:
            return None, [Diagnostic(0, label, "record not found")]
        hecke = self.hecke_nf(label)
        if hecke is None:
            return None, [Diagnostic(0, label, "no Hecke eigenvalue data")]
        try:
            return record_from_lmfdb(nf, hecke), []
        except ValueError as exc:
            return None, [Diagnostic(0, label, str(exc))]

    def fetch(self, levels: tuple[int, int], dims: tuple[int, int]) -> tuple[list[NewformRecord], list[Diagnostic]]:
        records, diags = [], []
        for label in self.search_labels(levels, dims):
            rec, d = self.fetch_label(label)
            diags.extend(d)
            if rec is not None:
                records.append(rec)
        records.sort(key=NewformRecord.sort_key)
        return records, diags


# ---------------------------------------------------------------------------
# conversion


def _solve_rational(rows: list[list[Fraction]], rhs_cols: int) -> list[list[Fraction]] | None:
    """Gauss-Jordan on an augmented matrix; None when singular."""
    n = len(rows)
    m = [list(r) for r in rows]
    for col in range(n):
        pivot = next((i for i in range(col, n) if m[i][col] != 0), None)
        if pivot is None:
            return None
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for i in range(n):
            if i != col and m[i][col] != 0:
                c = m[i][col]
                m[i] = [a - c * b for a, b in zip(m[i], m[col])]
    return [row[n:] for row in m]


def basis_matrix(hecke: dict, g: int) -> list[list[Fraction]] | None:
    """Row i = power-basis coordinates of the i-th Hecke ring basis element."""
    if hecke.get("hecke_ring_cyclotomic_generator"):
        return None
    if hecke.get("hecke_ring_power_basis") and not hecke.get("hecke_ring_numerators"):
        return [[Fraction(int(i == j)) for j in range(g)] for i in range(g)]
    nums, dens = hecke.get("hecke_ring_numerators"), hecke.get("hecke_ring_denominators")
    if not nums or not dens or len(nums) != g or len(dens) != g:
        return None
    rows = []
    for num, den in zip(nums, dens):
        if len(num) > g or den == 0:
            return None
        rows.append([Fraction(c, den) for c in num] + [Fraction(0)] * (g - len(num)))
    # reject a singular basis
    aug = [r + [Fraction(int(i == j)) for j in range(g)] for i, r in enumerate(rows)]
    if _solve_rational(aug, g) is None:
        return None
    return rows


def record_from_lmfdb(nf: dict, hecke: dict) -> NewformRecord:
    label = nf["label"]
    g = nf["dim"]
    level = nf["level"]
    field_poly = nf.get("field_poly") or hecke.get("field_poly")
    if g == 1 and not field_poly:
        field_poly = [0, 1]
    if nf.get("char_order", 1) != 1:
        raise ValueError("unsupported non-trivial character")
    B = basis_matrix(hecke, g)
    if B is None:
        raise ValueError("basis unresolved")
    ap = hecke["ap"]
    primes = primes_up_to(max(hecke.get("maxp", 0), 2))[: len(ap)]
    bound = min(data_bound_for(level), primes[-1] if primes else 0)
    eig = []
    for p, coords in zip(primes, ap):
        if p > bound:
            break
        if len(coords) != g:
            raise ValueError(f"coordinate length mismatch at p={p}: {len(coords)} != {g}")
        vec = [sum((Fraction(c) * B[i][j] for i, c in enumerate(coords)), Fraction(0)) for j in range(g)]
        den = lcm(*(v.denominator for v in vec))
        eig.append({"p": p, "num": [int(v * den) for v in vec], "den": den})
    return _record_from_dict({
        "label": label,
        "level": level,
        "weight": nf["weight"],
        "char_trivial": True,
        "dimension": g,
        "field_poly": list(field_poly),
        "eigenvalues": eig,
        "data_bound": bound,
    })

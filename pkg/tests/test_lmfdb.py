import json
import time
from fractions import Fraction

import pytest
import requests

from gl2torsion.cli import RunConfig, run
from gl2torsion.engine import predicted_torsion_order
from gl2torsion.lmfdb import CACHE_ENV, FetchError, LmfdbClient, default_cache_dir, record_from_lmfdb
from gl2torsion.newform_io import load_dataset


@pytest.fixture(scope="module")
def bundled():
    records, _ = load_dataset()
    return {r.label: r for r in records}


def lmfdb_rows(record, numerators=None, denominators=None):
    """LMFDB-shaped rows for a record, with a_p written in the basis num_i(x)/den_i."""
    g = record.dimension
    nf = {"label": record.label, "level": record.level, "weight": 2, "char_order": 1, "dim": g,
          "field_poly": list(record.field_poly)}
    hecke = {"label": record.label, "field_poly": list(record.field_poly), "hecke_ring_cyclotomic_generator": 0}
    if numerators is None:
        hecke["hecke_ring_power_basis"] = True
        basis = [[Fraction(int(i == j)) for j in range(g)] for i in range(g)]
    else:
        hecke.update(hecke_ring_power_basis=False, hecke_ring_numerators=numerators,
                     hecke_ring_denominators=denominators)
        basis = [[Fraction(c, d) for c in num] + [Fraction(0)] * (g - len(num)) for num, d in zip(numerators, denominators)]
    ap = []
    for p, (num, den) in record.eigenvalues.items():
        target = [Fraction(c, den) for c in num]
        # solve coords * basis = target (basis is upper triangular in the tests below)
        coords = [Fraction(0)] * g
        for j in reversed(range(g)):
            s = target[j] - sum(coords[i] * basis[i][j] for i in range(j + 1, g))
            coords[j] = s / basis[j][j]
        assert all(c.denominator == 1 for c in coords)
        ap.append([int(c) for c in coords])
    hecke["ap"] = ap
    hecke["maxp"] = max(record.eigenvalues)
    return nf, hecke


class FakeResponse:
    def __init__(self, payload, status=200):
        self.content = json.dumps(payload).encode()
        self.status_code = status

    def raise_for_status(self):
        if self.status_code >= 400:
            raise requests.HTTPError(f"HTTP {self.status_code}")


class FakeSession:
    def __init__(self, tables=None, fail=False):
        self.tables = tables or {}
        self.fail = fail
        self.calls = []

    def get(self, url, params=None, timeout=None):
        self.calls.append((time.monotonic(), url, dict(params)))
        if self.fail:
            raise requests.ConnectionError("network unreachable")
        table = url.rstrip("/").rsplit("/", 1)[-1]
        rows = self.tables.get(table, [])
        if "label" in params:
            data = [r for r in rows if r["label"] == params["label"]]
        else:
            lo_hi = json.loads(params["level"][2:])
            dims = json.loads(params["dim"][2:])
            data = [{"label": r["label"]} for r in rows
                    if lo_hi["$gte"] <= r["level"] <= lo_hi["$lte"] and dims["$gte"] <= r["dim"] <= dims["$lte"]]
            off, cnt = params["_offset"], params["_max_count"]
            page = data[off:off + cnt]
            return FakeResponse({"data": page, "next": "more" if off + cnt < len(data) else None})
        return FakeResponse({"data": data})


def session_for(*pairs):
    return FakeSession({"mf_newforms": [nf for nf, _ in pairs], "mf_hecke_nf": [h for _, h in pairs]})


def test_fetch_39_2_a_b_through_basis_change(bundled, tmp_path):
    rec = bundled["39.2.a.b"]
    # Hecke ring basis 1, (1 + x)/2 instead of the power basis
    rows = lmfdb_rows(rec, numerators=[[1], [1, 1]], denominators=[1, 2])
    client = LmfdbClient(tmp_path, session=session_for(rows), min_interval=0)
    got, diags = client.fetch_label("39.2.a.b")
    assert diags == [] and got.dimension == 2 and got.level == 39
    assert got.eigenvalues == {p: v for p, v in rec.eigenvalues.items() if p <= got.data_bound}
    assert predicted_torsion_order(got).T == 28


def test_cache_serves_identical_bytes_offline(bundled, tmp_path):
    rows = lmfdb_rows(bundled["11.2.a.a"])
    session = session_for(rows)
    first, _ = LmfdbClient(tmp_path, session=session, min_interval=0).fetch_label("11.2.a.a")
    cached = (tmp_path / "mf_hecke_nf" / "11.2.a.a.json").read_bytes()
    assert json.loads(cached)["data"][0]["ap"] == rows[1]["ap"]
    offline = LmfdbClient(tmp_path, session=FakeSession(fail=True), offline=True)
    second, _ = offline.fetch_label("11.2.a.a")
    assert second == first
    assert (tmp_path / "mf_hecke_nf" / "11.2.a.a.json").read_bytes() == cached
    assert len(session.calls) == 2


def test_cold_cache_network_failure_names_resource(tmp_path):
    client = LmfdbClient(tmp_path, session=FakeSession(fail=True), min_interval=0)
    with pytest.raises(FetchError, match="mf_newforms/39.2.a.b"):
        client.fetch_label("39.2.a.b")
    with pytest.raises(FetchError, match="not cached"):
        LmfdbClient(tmp_path, offline=True).fetch_label("39.2.a.b")


def test_low_levels_have_no_newforms(bundled, tmp_path):
    client = LmfdbClient(tmp_path, session=session_for(lmfdb_rows(bundled["11.2.a.a"])), min_interval=0)
    records, diags = client.fetch((1, 10), (1, 5))
    assert records == [] and diags == []


def test_range_fetch_paginates(bundled, tmp_path, monkeypatch):
    monkeypatch.setattr("gl2torsion.lmfdb.PAGE_SIZE", 2)
    labels = ["11.2.a.a", "14.2.a.a", "15.2.a.a", "23.2.a.a", "39.2.a.b"]
    client = LmfdbClient(tmp_path, session=session_for(*(lmfdb_rows(bundled[l]) for l in labels)), min_interval=0)
    records, diags = client.fetch((1, 40), (1, 2))
    assert [r.label for r in records] == labels and diags == []


def test_singular_basis_is_skipped(bundled, tmp_path):
    nf, hecke = lmfdb_rows(bundled["39.2.a.b"])
    hecke.update(hecke_ring_power_basis=False, hecke_ring_numerators=[[1], [2]], hecke_ring_denominators=[1, 1])
    client = LmfdbClient(tmp_path, session=session_for((nf, hecke)), min_interval=0)
    rec, diags = client.fetch_label("39.2.a.b")
    assert rec is None and diags[0].message == "basis unresolved"


def test_unknown_label(tmp_path):
    rec, diags = LmfdbClient(tmp_path, session=FakeSession(), min_interval=0).fetch_label("nonexistent.label")
    assert rec is None and diags[0].message == "record not found"


def test_rate_limit(bundled, tmp_path):
    session = session_for(lmfdb_rows(bundled["11.2.a.a"]))
    LmfdbClient(tmp_path, session=session, min_interval=0.2).fetch_label("11.2.a.a")
    (t0, *_), (t1, *_) = session.calls
    assert t1 - t0 >= 0.2


def test_cache_dir_env_and_flag(bundled, tmp_path, monkeypatch):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path / "env"))
    assert default_cache_dir() == tmp_path / "env"
    assert default_cache_dir(str(tmp_path / "flag")) == tmp_path / "flag"
    session = session_for(lmfdb_rows(bundled["11.2.a.a"]))
    flag_dir = tmp_path / "flag"
    cfg = RunConfig(command="fetch", label="11.2.a.a", cache_dir=str(flag_dir), output=str(tmp_path / "out.jsonl"))
    client = LmfdbClient(cfg.cache_dir, session=session, min_interval=0)
    assert run(cfg, out=open(tmp_path / "stdout", "w"), client=client) == 0
    assert (flag_dir / "mf_newforms" / "11.2.a.a.json").exists()
    assert not (tmp_path / "env").exists()
    records, _ = load_dataset(tmp_path / "out.jsonl")
    assert records[0].label == "11.2.a.a"


def test_record_from_lmfdb_rejects_character(bundled):
    nf, hecke = lmfdb_rows(bundled["11.2.a.a"])
    nf["char_order"] = 2
    with pytest.raises(ValueError, match="character"):
        record_from_lmfdb(nf, hecke)

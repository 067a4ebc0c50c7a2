import json

from vresidue.cache import ResultCache, cache_key


def test_round_trip(tmp_path):
    c = ResultCache("1.0", root=tmp_path)
    k = cache_key("h", "contour", "p", {"nodes": 64}, "1.0")
    assert c.get(k) is None
    c.put(k, {"value": [1, 0]})
    assert c.get(k) == {"value": [1, 0]}
    assert (c.hits, c.misses) == (1, 1)


def test_key_depends_on_every_part():
    base = ("h", "contour", "p", {"nodes": 64}, "1.0")
    k0 = cache_key(*base)
    for i, alt in enumerate(["h2", "boundary", "q", {"nodes": 32}, "1.1"]):
        parts = list(base)
        parts[i] = alt
        assert cache_key(*parts) != k0


def test_disabled_cache_stores_nothing(tmp_path):
    c = ResultCache("1.0", root=tmp_path, enabled=False)
    c.put("ab", {"x": 1})
    assert c.get("ab") is None
    assert not any(tmp_path.iterdir())


def test_corrupt_entry_is_a_miss(tmp_path):
    c = ResultCache("1.0", root=tmp_path)
    k = cache_key("h", "m", "c", {}, "1.0")
    c.put(k, {"x": 1})
    path = tmp_path / "1.0" / k[:2] / f"{k}.json"
    path.write_text("{not json")
    assert c.get(k) is None


def test_gc_drops_other_versions_and_corrupt_entries(tmp_path):
    old = ResultCache("0.9", root=tmp_path)
    old.put(cache_key("h", "m", "c", {}, "0.9"), {"x": 1})
    cur = ResultCache("1.0", root=tmp_path)
    good = cache_key("h", "m", "c", {}, "1.0")
    cur.put(good, {"x": 2})
    bad = tmp_path / "1.0" / "zz" / "broken.json"
    bad.parent.mkdir(parents=True)
    bad.write_text(json.dumps({"key": "other"}))
    info = cur.gc()
    assert info["removed_versions"] == ["0.9"]
    assert info["removed_entries"] == 1
    assert info["kept_entries"] == 1
    assert cur.get(good) == {"x": 2}


def test_env_root(tmp_path, monkeypatch):
    monkeypatch.setenv("VRESIDUE_CACHE_DIR", str(tmp_path / "env"))
    assert ResultCache("1.0").root == tmp_path / "env"

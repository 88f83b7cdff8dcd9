import csv
import io
import json

import pytest

from wreathmetric.cli import EXIT_CAP, EXIT_PARSE, config_hash, main

WORD = "t t a t a t- t- t- t- a t- t- a t"
TWO_ORBITS = '{"base": "Z", "omega": [{"type": "cycle", "size": 3}, {"type": "cycle", "size": 2}]}'


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_eval_section_word():
    code, text = run("eval", "--group", "Z2 wr Z", WORD)
    assert code == 0
    assert json.loads(text) == {"cursor": -2, "support": [[-3, 1], [-1, 1], [2, 1], [3, 1]]}


def test_eval_empty_word_is_identity():
    code, text = run("eval", "--group", "Z2 wr Z")
    assert code == 0 and json.loads(text) == {"cursor": 0, "support": []}


def test_eval_word_file(tmp_path):
    f = tmp_path / "w.txt"
    f.write_text(WORD + "\n")
    assert run("eval", "--group", "Z2 wr Z", "--word-file", str(f)) == run("eval", "--group", "Z2 wr Z", WORD)


def test_malformed_token(capsys):
    code, _ = run("eval", "--group", "Z2 wr Z", "t b t")
    assert code == EXIT_PARSE
    assert "'b'" in capsys.readouterr().err


def test_bad_group():
    assert run("eval", "--group", "Q8", "x")[0] == EXIT_PARSE


@pytest.mark.parametrize("mode, value", [("exact", 14), ("bfs", 14), ("estimate:1", 10), ("estimate:2", 14), ("estimate:6", 12)])
def test_norm_modes(mode, value):
    code, text = run("norm", "--group", "Z2 wr Z", "--mode", mode, WORD)
    assert code == 0
    first, second = text.splitlines()
    assert int(first) == value
    assert second.startswith("# ")
    assert ("not exact" in second) == mode.startswith("estimate")


@pytest.mark.parametrize("mode", ["exact", "bfs", "estimate:3", "estimate:7"])
def test_norm_of_identity(mode):
    code, text = run("norm", "--group", "Z2 wr Z", "--mode", mode, "--perturb")
    assert code == 0 and text.splitlines()[0] == "0"


def test_norm_factor_group():
    code, text = run("norm", "--group", "H3", "x y x- y-")
    assert code == 0 and text.splitlines()[0] == "4"


def test_norm_caps(capsys):
    code, _ = run("norm", "--group", "Z2 wr Z", "--mode", "bfs", "--bfs-cap", "3", "t t t t t")
    assert code == EXIT_CAP
    assert "--bfs-cap" in capsys.readouterr().err
    word = " ".join(["a t t"] * 12)
    assert run("norm", "--group", "Z2 wr Z", "--mode", "exact", "--tsp-cap", "6", word)[0] == EXIT_CAP
    assert run("norm", "--group", "Z2 wr Z", "--mode", "estimate:1", "--tsp-cap", "6", word)[0] == 0


def test_norm_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"variant": 3, "a_source": {"kind": "affine", "scale": 2, "offset": 1}}))
    code, text = run("norm", "--group", "Z2 wr Z", "--mode", "estimate:3", "--config", str(cfg), WORD)
    # four lamps of estimated size 3 plus mu = 6
    assert code == 0 and text.splitlines()[0] == "18"


def parse_compare(text):
    lines = text.splitlines()
    assert lines[0].startswith("# wreathmetric ")
    return list(csv.DictReader(lines[1:]))


def test_compare_radius_zero():
    code, text = run("compare", "--radius", "0")
    rows = parse_compare(text)
    assert code == 0
    assert rows[0]["element_id"] == "0"
    assert [rows[0][f"v{k}"] for k in range(1, 8)] == ["0"] * 7
    assert [r["element_id"] for r in rows[1:]] == ["fit_C", "fit_D"]


def test_compare_radius_six():
    code, text = run("compare", "--radius", "6")
    rows = parse_compare(text)[:-2]
    assert code == 0 and len(rows) == 155
    for r in rows:
        assert 1 <= float(r["ratio1"]) <= 2 or r["exact"] == "0"
        assert r["v2"] == r["exact"]
        assert "." in r["ratio3"] and len(r["ratio3"].split(".")[1]) == 4


def test_compare_reproducible_with_sample(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("compare", "--radius", "5", "--sample", "20", "--seed", "3", "--out", str(a))[0] == 0
    assert run("compare", "--radius", "5", "--sample", "20", "--seed", "3", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    run("compare", "--radius", "5", "--sample", "20", "--seed", "4", "--out", str(c))
    assert a.read_bytes() != c.read_bytes()


def test_compare_uses_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("WREATHMETRIC_CACHE_DIR", str(tmp_path))
    first = run("compare", "--radius", "3")
    assert list(tmp_path.glob("ball-*.pickle"))
    assert run("compare", "--radius", "3") == first


def test_distortion_heisenberg(tmp_path):
    cfg = {"type": "subgroup", "ambient": "H3", "words": ["x y x- y-"], "n_max": 12, "h_radius": 9}
    code, text = run("distortion", json.dumps(cfg), "--out", str(tmp_path))
    assert code == 0
    summary = json.loads(text)
    assert summary["delta_at_n_max"] >= 9
    assert summary["config_hash"] == config_hash(cfg)
    table = (tmp_path / "table.csv").read_text().splitlines()
    assert table[0] == f"# wreathmetric 0.1.0 config={config_hash(cfg)}"
    assert table[-1].startswith("12,9,")
    data = json.loads((tmp_path / "table.json").read_text())
    assert data["config_hash"] == config_hash(cfg)


def test_distortion_linear_and_plot(tmp_path):
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps({"ambient": "Z", "words": ["x x"], "n_max": 6, "h_radius": 6}))
    code, text = run("distortion", str(f), "--plot")
    assert code == 0
    assert text.splitlines() == [f"{n} {n // 2}" for n in range(7)]


def test_distortion_cyclic():
    cfg = {"type": "cyclic", "group": "Z2 wr Z", "word": "a t", "N": 32}
    code, text = run("distortion", json.dumps(cfg))
    assert code == 0
    assert json.loads(text)["classification"] == "NonStabilizing"


def test_distortion_outputs_are_byte_identical(tmp_path):
    cfg = json.dumps({"ambient": "Z2 wr Z", "a_words": ["a"], "b_words": ["t t"], "n_max": 6, "h_radius": 5, "seed": 2})
    run("distortion", cfg, "--out", str(tmp_path / "a"))
    run("distortion", cfg, "--out", str(tmp_path / "b"))
    for name in ("table.csv", "table.json", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_orbits():
    code, text = run("orbits", TWO_ORBITS)
    assert code == 0
    assert text.splitlines() == ["orbit 0: basepoint=[0,0,0] size=3", "orbit 1: basepoint=[1,1,0] size=2"]


def test_orbits_rejects_bad_action():
    bad = '{"base": "Z^2", "omega": [{"type": "perm", "perms": [[1, 0, 2], [0, 2, 1]]}]}'
    assert run("orbits", bad)[0] == EXIT_PARSE


def test_nonregular_norm():
    code, text = run("nonregular-norm", "--action", TWO_ORBITS, "t a@0 t- a@1")
    lines = text.splitlines()
    assert code == 0
    assert "estimate 3" in lines
    assert "bfs 4" in lines

import csv
import io
import json
from fractions import Fraction

import pytest

from janossy import cli
from janossy.polyparse import PotentialSyntaxError, parse_coefficients, parse_potential


@pytest.fixture(autouse=True)
def cache_env(tmp_path, monkeypatch):
    root = tmp_path / "cache"
    monkeypatch.setenv(cli.CACHE_ENV, str(root))
    return root


def run(*argv):
    buf = io.StringIO()
    code = cli.run(list(argv), out=buf)
    return code, buf.getvalue()


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


def test_tw_example(cache_env):
    code, text = run("tw", "--alpha-min", "-6", "--alpha-max", "3", "--steps", "19")
    assert code == 0
    rows = rows_of(text)
    assert rows[0] == ["alpha", "F_fredholm", "F_painleve", "abs_diff"]
    assert len(rows) == 20
    assert max(float(r[3]) for r in rows[1:]) <= 1e-6
    assert float(rows[1][0]) == -6.0 and float(rows[-1][0]) == 3.0
    assert "\r" not in text and text.endswith("\n")


def test_order_law_alpha6():
    code, text = run("order-law", "--m", "1", "--alpha", "6")
    assert code == 0
    rows = rows_of(text)
    assert len(rows) == 2
    assert rows[0] == ["alpha", "m", "F_route_a", "F_route_b", "abs_diff"]
    assert abs(float(rows[1][2]) - 1.0) <= 1e-10


def test_equilibrium_json():
    code, text = run("equilibrium", "--V", "2*x^2")
    assert code == 0
    doc = json.loads(text)
    s = doc["summary"]
    assert abs(s["band"][0] + 1) <= 1e-10 and abs(s["band"][1] - 1) <= 1e-10
    assert abs(s["c_V"] - 2) <= 1e-12
    assert "formula_ref" in doc and doc["formula_ref"]


def test_cache_hit_identical_bytes(cache_env, tmp_path):
    args = ["tw", "--alpha-min", "-1", "--alpha-max", "1", "--steps", "3"]
    code1, a = run(*args)
    files = sorted(p.name for p in cache_env.iterdir())
    assert code1 == 0 and len(files) == 2
    mtimes = {p.name: p.stat().st_mtime_ns for p in cache_env.iterdir()}
    code2, b = run(*args)
    assert code2 == 0 and a.encode() == b.encode()
    assert {p.name: p.stat().st_mtime_ns for p in cache_env.iterdir()} == mtimes
    # output files are also byte-identical across runs
    o1, o2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run(*args, "--out", str(o1))
    run(*args, "--out", str(o2), "--no-cache")
    assert o1.read_bytes() == o2.read_bytes() == a.encode()


def test_cache_key_changes_with_resolution(cache_env):
    run("tw", "--alpha-min", "0", "--alpha-max", "1", "--steps", "2")
    run("tw", "--alpha-min", "0", "--alpha-max", "1", "--steps", "2", "--resolution", "120")
    assert len(list(cache_env.glob("*.csv"))) == 2
    base = cli.resolve_config("tw", {}, {})
    other = dict(base, resolution=120)
    assert cli.cache_key("tw", base) != cli.cache_key("tw", other)
    # output plumbing does not change the key
    assert cli.cache_key("tw", base) == cli.cache_key("tw", dict(base, out="x.csv", json="-"))


def test_cache_dir_recreated(cache_env):
    import shutil
    args = ["order-law", "--alpha", "1"]
    run(*args)
    shutil.rmtree(cache_env)
    code, _ = run(*args)
    assert code == 0 and cache_env.is_dir() and len(list(cache_env.glob("*.csv"))) == 1


def test_corrupt_cache_recomputes(cache_env, capsys):
    args = ["order-law", "--alpha", "0.5"]
    _, good = run(*args)
    table = next(cache_env.glob("*.csv"))
    table.write_bytes(b"alpha,F\n0.5,0.123\n")
    code, again = run(*args)
    assert code == 0 and again == good
    assert "corrupt cache entry" in capsys.readouterr().err
    # entry overwritten with the correct table
    assert table.read_bytes() == good.encode()
    side = next(cache_env.glob("*.json"))
    side.write_text("{not json")
    assert run(*args)[1] == good
    assert "recomputing" in capsys.readouterr().err


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# tw table\nalpha_min = -1\nalpha-max = 1\nsteps = 5  # five points\n")
    code, text = run("tw", "--config", str(cfg), "--steps", "3")
    assert code == 0
    rows = rows_of(text)
    assert len(rows) == 4  # flag beats config
    assert float(rows[1][0]) == -1.0 and float(rows[-1][0]) == 1.0  # config beats defaults
    p = cli.resolve_config("tw", {"steps": "7"}, {"steps": 5})
    assert p["steps"] == 7 and p["resolution"] == 160


def test_config_lists_and_strings(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text('V = "x^4 + 1/2 x^2"\nns = [16, 32]\n')
    conf = cli.read_config(str(cfg))
    assert conf == {"V": "x^4 + 1/2 x^2", "ns": [16, 32]}
    p = cli.resolve_config("converge", {}, conf)
    assert p["ns"] == [16, 32]


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("steps = 3\nbogus = 1\n")
    code, _ = run("tw", "--config", str(cfg))
    assert code == 2
    assert "bogus" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert run("nosuch")[0] == 2
    assert run()[0] == 2
    code, _ = run("tw", "--steps", "many")
    assert code == 2 and "--steps" in capsys.readouterr().err
    code, _ = run("equilibrium", "--V", "2*x^^2")
    assert code == 2 and "--V" in capsys.readouterr().err
    assert run("sample", "--seed", str(2 ** 64))[0] == 2
    assert run("tw", "--bogus", "1")[0] == 2


def test_computation_error_exit1(capsys):
    # odd-degree potential is not confining
    code, _ = run("equilibrium", "--V", "x^3", "--no-cache")
    assert code == 1
    assert "janossy:" in capsys.readouterr().err
    code, _ = run("tw", "--alpha-min", "-9", "--alpha-max", "-8", "--steps", "2", "--no-cache")
    assert code == 1


def test_json_and_out_files(tmp_path):
    out, js = tmp_path / "t.csv", tmp_path / "t.json"
    code, text = run("order-law", "--m", "2", "--alpha-min", "-1", "--alpha-max", "1", "--steps", "3",
                     "--out", str(out), "--json", str(js))
    assert code == 0 and text == ""
    assert len(rows_of(out.read_text())) == 4
    doc = json.loads(js.read_text())
    assert doc["command"] == "order-law" and doc["config"]["m"] == 2
    assert doc["columns"] == rows_of(out.read_text())[0]


def test_other_commands_run():
    assert run("kernel", "--kind", "M", "--alpha", "0", "--points", "[0.5, 1]")[0] == 0
    code, text = run("orthopoly", "--n", "4")
    assert code == 0 and rows_of(text)[0][0] == "k"
    code, text = run("parametrix-check", "--points", "5")
    assert code == 0 and len(rows_of(text)) > 1


def test_float_format_round_trip():
    import numpy as np
    rng = np.random.default_rng(1)
    for v in np.concatenate([rng.standard_normal(200) * 10.0 ** rng.integers(-30, 30, 200), [0.1, 1 / 3, 1e-300]]):
        s = cli.fmt(float(v))
        assert float(s) == float(v)
    assert cli.fmt(3) == "3" and cli.fmt(0.5) == "0.5"


def test_to_csv_shape():
    data = cli.to_csv(["a", "b"], [[1, 0.25], [2, 1e-20]])
    assert data == b"a,b\n1,0.25\n2,9.9999999999999995e-21\n"


def test_polyparse():
    assert parse_coefficients("2*x^2") == [0, 0, 2]
    assert parse_coefficients("x^4 + 1/2 x^2") == [0, 0, Fraction(1, 2), 0, 1]
    assert parse_coefficients("2*x**2 - 3/4") == [Fraction(-3, 4), 0, 2]
    assert parse_coefficients("(x+1)^2") == [1, 2, 1]
    assert parse_coefficients("x^2/4 + 0.5") == [Fraction(1, 2), 0, Fraction(1, 4)]
    V = parse_potential("x^4 - x^2")
    assert V(2.0) == 12.0
    for bad in ("", "x^", "2*", "x^-1", "x^1.5", "1/x", "y^2", "(x+1", "x^2)"):
        with pytest.raises(PotentialSyntaxError):
            parse_coefficients(bad)

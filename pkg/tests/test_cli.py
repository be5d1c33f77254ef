import json
from pathlib import Path

import jsonschema
import pytest
from click.testing import CliRunner

from altguard.cli import main
from altguard.cli.generate import generate
from altguard.cli.render import curve_samples
from altguard.cli.report import report_schema
from altguard.terrain import parse_terrain

GOLDEN = Path(__file__).parent / "golden"
TW = str(GOLDEN / "tw.json")


@pytest.fixture
def run():
    runner = CliRunner()

    def go(*args):
        return runner.invoke(main, [str(a) for a in args])

    return go


def _report(res):
    data = json.loads(res.output)
    jsonschema.validate(data, report_schema())
    return data


def _golden(name, data):
    assert data == json.loads((GOLDEN / name).read_text())


@pytest.mark.parametrize("k,h", [(1, "2"), (2, "1")])
def test_atc(run, k, h):
    res = run("atc", "--terrain", TW, "--k", k)
    assert res.exit_code == 0, res.output
    rep = _report(res)
    assert rep["solution"]["h_star"] == h
    assert rep["verification"] == {"method": "sampled-cover", "ok": True}
    assert rep["command"][:5] == ["atc", "--terrain", TW, "--k", str(k)]
    _golden(f"atc_k{k}.json", rep["solution"])


def test_atc_bisect(run):
    rep = _report(run("atc", "--terrain", TW, "--k", 2, "--mode", "bisect", "--eps", "1e-9"))
    assert abs(float(rep["solution"]["h_star"]) - 1) <= 1e-9
    assert rep["mode"] == "bisect"


def test_atc_many_terrains_parallel(run, tmp_path):
    paths = []
    for seed in range(3):
        p = tmp_path / f"t{seed}.json"
        p.write_text(generate(12, seed).to_json())
        paths.append(p)
    args = ["atc", "--k", 2, "--jobs", 2]
    for p in paths:
        args += ["--terrain", p]
    res = run(*args)
    assert res.exit_code == 0, res.output
    reps = json.loads(res.output)
    assert len(reps) == 3
    for r in reps:
        jsonschema.validate(r, report_schema())


def test_batc_commands(run):
    rep = _report(run("batc-count", "--terrain", TW, "--height", 1))
    assert rep["solution"]["count"] == 2
    assert rep["verification"]["ok"]
    _golden("batc_count_h1.json", rep["solution"])
    rep = _report(run("batc-altitude", "--terrain", TW, "--k", 2))
    assert rep["solution"]["h_star"] == "1"
    _golden("batc_altitude_k2.json", rep["solution"])


def test_bad_input_exits_2(run, tmp_path):
    assert run("batc-count", "--terrain", TW, "--height", "0.5").exit_code == 2
    assert run("batc-count", "--terrain", TW, "--height", "abc").exit_code == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertices": [[0, 0], [0, 1]]}')
    assert run("atc", "--terrain", bad, "--k", 1).exit_code == 2
    assert run("atc", "--terrain", tmp_path / "missing.json", "--k", 1).exit_code == 2
    assert run("atc", "--terrain", TW, "--k", 1, "--eps", "-1").exit_code == 2
    assert run("gen", "--n", 1).exit_code == 2


def test_verification_failure_exits_3(run, monkeypatch):
    import altguard.cli as cli

    monkeypatch.setattr(cli.oracles, "oracle_cover_check", lambda *a, **k: False)
    res = run("atc", "--terrain", TW, "--k", 1)
    assert res.exit_code == 3
    assert json.loads(res.output)["verification"]["ok"] is False


def test_gen(run, tmp_path):
    a = run("gen", "--n", 5, "--seed", 7, "--profile", "peaks")
    b = run("gen", "--n", 5, "--seed", 7, "--profile", "peaks")
    assert a.exit_code == 0 and a.output == b.output
    t = parse_terrain(a.output)
    assert t.n == 5 and all(x < y for x, y in zip(t.xs, t.xs[1:]))
    out = tmp_path / "t.json"
    assert run("gen", "--n", 40, "--profile", "staircase", "-o", out).exit_code == 0
    assert parse_terrain(out.read_text()).n >= 2
    assert run("gen", "--n", 6, "--seed", 8).output != a.output


@pytest.mark.parametrize("profile", ["random", "peaks", "staircase"])
def test_generator_profiles(profile):
    t = generate(30, 3, profile)
    assert t.n >= 2
    assert generate(30, 3, profile).vertices == t.vertices
    with pytest.raises(ValueError):
        generate(1, 0, profile)


def test_curves_and_plot(run, tmp_path):
    res = run("curves", "--terrain", TW)
    assert res.exit_code == 0
    curves = json.loads(res.output)
    assert [c["name"] for c in curves] == ["f", "g"]
    samp = curve_samples(curves[0], 1.0, 3.0, 4)
    assert [round(x, 9) for x, _ in samp] == [1.0, 1.5, 2.0, 2.5, 3.0]

    svg = tmp_path / "t.svg"
    assert run("plot", "--terrain", TW, "-o", svg).exit_code == 0
    text = svg.read_text()
    assert text.count("<polyline") == 1 and "altitude" not in text

    sol = tmp_path / "sol.json"
    sol.write_text(run("atc", "--terrain", TW, "--k", 2).output)
    assert run("plot", "--terrain", TW, "--solution", sol, "-o", svg).exit_code == 0
    text = svg.read_text()
    assert text.count('class="guard"') == 2 and 'class="altitude"' in text and "stroke-dasharray" in text

    cv = tmp_path / "curves.json"
    cv.write_text(res.output)
    assert run("plot", "--terrain", TW, "--curves", cv, "-o", svg).exit_code == 0
    assert svg.read_text().count('class="curve"') == 2

    bsol = tmp_path / "b.json"
    bsol.write_text(run("batc-altitude", "--terrain", TW, "--k", 2).output)
    assert run("plot", "--terrain", TW, "--solution", bsol, "-o", svg).exit_code == 0
    assert svg.read_text().count('class="subchain"') == 2


def test_plot_rejects_malformed(run, tmp_path):
    junk = tmp_path / "junk.json"
    junk.write_text('{"guards": []}')
    assert run("plot", "--terrain", TW, "--solution", junk, "-o", tmp_path / "x.svg").exit_code == 2
    junk.write_text("not json")
    assert run("plot", "--terrain", TW, "--curves", junk, "-o", tmp_path / "x.svg").exit_code == 2


def test_oracle_commands(run):
    out = json.loads(run("oracle", "min-guards", "--terrain", TW, "--height", 1).output)
    assert out["result"] == 2
    out = json.loads(run("oracle", "atc", "--terrain", TW, "--k", 1).output)
    assert abs(out["result"]["h_star"] - 2) < 1e-6
    out = json.loads(run("oracle", "batc", "--terrain", TW, "--k", 2).output)
    assert out["result"]["h_star"] == "1"
    out = json.loads(run("oracle", "cover", "--terrain", TW, "--height", 1, "--guards", "1,3").output)
    assert out["result"] is True
    assert run("oracle", "cover", "--terrain", TW, "--height", 0, "--guards", "1").exit_code == 2

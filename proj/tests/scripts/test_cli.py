"""End-to-end checks of the lockleak command line tool."""

import csv
import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))
import recompute_report  # noqa: E402

ROOT = Path(os.environ.get("LOCKLEAK_SOURCE_DIR", Path(__file__).resolve().parents[2]))
BIN = os.environ.get("LOCKLEAK_BIN") or shutil.which("lockleak")
FIXTURES = ROOT / "tests" / "fixtures"
SCHEMA = ROOT / "docs" / "report.schema.json"

pytestmark = pytest.mark.skipif(not BIN, reason="LOCKLEAK_BIN not set")


def run(*args, check=True):
    proc = subprocess.run([BIN, *map(str, args)], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"{args} exited {proc.returncode}: {proc.stderr}")
    return proc


def rows(text):
    return list(csv.DictReader(text.splitlines()))


@pytest.fixture
def fig5(tmp_path):
    path = tmp_path / "fig5.json"
    run("gen", "--name", "fig5_example", "--out", path)
    return path


def test_fig5_analyze_matches_fixture(fig5, tmp_path):
    shipped = rows((FIXTURES / "fig5" / "verdicts.csv").read_text())
    for scenario in ("set-all", "set-ll-key"):
        out = tmp_path / f"{scenario}.csv"
        run("analyze", "--in", fig5, "--scenario", scenario, "--mode", "exact", "--out", out)
        got = rows(out.read_text())
        assert got == [r for r in shipped if r["scenario"] == scenario]
    ll = rows((tmp_path / "set-ll-key.csv").read_text())
    assert [r["verdict"] for r in ll] == ["DT", "S"]
    assert ll[0]["witness"] == "3"


def test_dualrail_and_oracle_agree_on_fig5(fig5):
    dual = rows(run("analyze", "--in", fig5, "--scenario", "set-ll-key").stdout.split("\n\n")[0])
    oracle = rows(run("oracle", "--in", fig5, "--scenario", "set-ll-key").stdout)
    assert [r["verdict"] for r in dual[:2]] == ["DT", "S"]
    assert [r["verdict"] for r in oracle[:2]] == ["DT", "S"]
    assert oracle[0]["mode"] == "oracle"


def test_sim_restores_reference_under_correct_key(fig5, tmp_path):
    ref = tmp_path / "ref.json"
    run("gen", "--name", "fig5_reference", "--out", ref)
    for bits in range(32):
        vec = {"in1": bits & 1, "in2": bits >> 1 & 1, "in3": bits >> 2 & 1,
               "enc_key1": bits >> 3 & 1, "enc_key2": bits >> 4 & 1}
        plain = tmp_path / "plain.json"
        plain.write_text(json.dumps(vec))
        keyed = tmp_path / "keyed.json"
        keyed.write_text(json.dumps({**vec, "lolo_key1": 0, "lolo_key2": 0}))
        want = json.loads(run("sim", "--in", ref, "--inputs", plain).stdout)
        got = json.loads(run("sim", "--in", fig5, "--inputs", keyed).stdout)
        assert got["outputs"] == want["outputs"]


def test_batch_matches_golden_and_recomputes(tmp_path):
    out = tmp_path / "batch"
    run("batch", "--spec", FIXTURES / "toy_batch" / "spec.json", "--jobs", 2, "--out-dir", out)
    expected = FIXTURES / "toy_batch" / "expected"
    produced = sorted(p.name for p in out.iterdir())
    assert produced == sorted(p.name for p in expected.iterdir())
    for name in produced:
        assert (out / name).read_bytes() == (expected / name).read_bytes(), name

    assert recompute_report.check(out, SCHEMA) == []

    again = tmp_path / "again.json"
    run("report", "--in-dir", out, "--out", again)
    assert again.read_bytes() == (out / "report.json").read_bytes()


def test_schema_rejects_malformed_reports():
    schema = json.loads(SCHEMA.read_text())
    report = json.loads((FIXTURES / "toy_batch" / "expected" / "report.json").read_text())
    jsonschema.validate(report, schema)
    for mutate in (
        lambda r: r["groups"][0].__setitem__("average_detection_rate", "50.00"),
        lambda r: r["groups"][0].__setitem__("scenario", "set-some"),
        lambda r: r.__setitem__("extra", 1),
        lambda r: r["groups"][0]["bits"][0].pop("nd"),
        lambda r: r.__setitem__("version", 2),
    ):
        bad = json.loads(json.dumps(report))
        mutate(bad)
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(bad, schema)


def test_recompute_detects_tampering(tmp_path):
    work = tmp_path / "batch"
    shutil.copytree(FIXTURES / "toy_batch" / "expected", work)
    text = (work / "verdicts.csv").read_text().splitlines(keepends=True)
    idx = next(i for i, line in enumerate(text) if ",epic," in line and ",S," in line)
    text[idx] = text[idx].replace(",S,", ",DT,", 1)
    (work / "verdicts.csv").write_text("".join(text))
    problems = recompute_report.check(work, SCHEMA)
    assert any("average_detection_rate" in p for p in problems)


def test_round_half_even():
    assert recompute_report.pct(1, 128) == "0.7812"
    assert recompute_report.pct(3, 128) == "2.3438"
    assert recompute_report.pct(2, 4) == "50.0000"
    assert recompute_report.pct(2, 3) == "66.6667"


def test_lock_analyze_round_trip(tmp_path):
    base = tmp_path / "spn.json"
    run("gen", "--name", "toy_spn", "--out", base)
    for scheme in ("epic", "dmux"):
        locked = tmp_path / f"{scheme}.json"
        run("lock", "--in", base, "--scheme", scheme, "--key-pct", 25, "--seed", 3, "--out", locked)
        doc = json.loads(locked.read_text())
        assert sum(1 for i in doc["inputs"] if i["role"] == "lolo_key") == 38
        verdicts = tmp_path / f"{scheme}.csv"
        run("analyze", "--in", locked, "--scenario", "set-all", "--out", verdicts)
        assert len(rows(verdicts.read_text())) == 12


def test_exit_codes(tmp_path, fig5):
    assert run(check=False).returncode == 1
    assert run("analyze", "--bogus", check=False).returncode == 1
    assert run("analyze", "--in", tmp_path / "missing.json", check=False).returncode == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run("analyze", "--in", bad, check=False).returncode == 2
    assert run("analyze", "--in", fig5, "--scenario", "sideways", check=False).returncode == 2
    assert run("lock", "--in", fig5, "--scheme", "epic", "--key-bits", 100000, check=False).returncode == 2
    assert run("gen", "--name", "aes", check=False).returncode == 2
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"benchmark": {"name": "toy_spn"}, "schemes": ["epic"], "variants": 0}))
    assert run("batch", "--spec", spec, "--out-dir", tmp_path / "o", check=False).returncode == 2
    assert run("report", "--in-dir", tmp_path / "nowhere", check=False).returncode == 2


def test_assure_mode_without_sites(tmp_path):
    design = tmp_path / "xor.json"
    design.write_text(json.dumps({
        "inputs": [{"name": "a", "width": 2, "role": "operational"},
                   {"name": "k", "width": 2, "role": "secret"}],
        "nodes": [{"op": "xor", "args": [0, 1]}],
        "outputs": [{"name": "y", "node": 2}],
    }))
    run("assure-lock", "--in", design, "--modes", "ops", "--out", tmp_path / "ops.json")
    proc = run("assure-lock", "--in", design, "--modes", "ops,branch", "--out", tmp_path / "b.json", check=False)
    assert proc.returncode == 2
    assert "no lockable sites" in proc.stderr

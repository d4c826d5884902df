import json
import subprocess
import sys

import pytest

from polarproxy import synth
from polarproxy.cli import main


@pytest.fixture(scope="module")
def project(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synth", "-o", str(d), "--frames", "4", "--seed", "3"]) == 0
    return d


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_synth_writes_bundle_and_config(project):
    names = {p.name for p in project.iterdir()}
    assert {"pipeline.ini", "truth.json", "distances.csv", "controls.csv",
            "election_2018.csv", "weights_2019.csv"} <= names


def test_validate_ok(project, capsys):
    code, out, _ = run(capsys, "validate", "--config", str(project / "pipeline.ini"))
    assert code == 0
    doc = json.loads(out)
    assert doc["ok"] and len(doc["files"]) == 6


def test_validate_reports_bad_rows(tmp_path, capsys):
    f = tmp_path / "votes.csv"
    f.write_text("province,A,B\nAnkara,0.5,0.5\nAnkara,0.2,0.2\nNowhere,0.5,0.5\n")
    code, out, _ = run(capsys, "validate", str(f), "--schema", "election", "--lenient")
    assert code == 1
    assert len(json.loads(out)["files"][0]["rejected"]) == 2
    code, _, err = run(capsys, "validate", str(f), "--schema", "election")
    assert code == 1 and "votes.csv:3:" in err


def test_entropy_formats(project, capsys):
    votes = str(project / "election_2018.csv")
    code, out, _ = run(capsys, "entropy", "--votes", votes, "--year", "2018")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("province,h_unweighted") and len(lines) == 82
    code, out, _ = run(capsys, "--format", "json", "entropy", "--votes", votes,
                       "--weights", str(project / "weights_2018.csv"))
    doc = json.loads(out)
    assert doc["units"] == "nats" and len(doc["provinces"]) == 81


def test_global_flag_either_side(project, capsys):
    t = str(project / "t.csv")
    base = ["merge", "--votes", str(project / "election_2018.csv"),
            "--distances", str(project / "distances.csv"),
            "--controls", str(project / "controls.csv"), "--year", "2018",
            "--report", str(project / "join.json"), "-o", t]
    assert run(capsys, *base)[0] == 0
    a = run(capsys, "--format", "csv", "regress", "--table", t)
    b = run(capsys, "regress", "--table", t, "--format", "csv")
    assert a[0] == b[0] == 0 and a[1] == b[1]
    assert a[1].startswith("model,")
    c = run(capsys, "--baseline-region", "west", "vif", "--table", t)
    assert c[0] == 0 and "Central" in c[1] and "West" not in c[1]
    d = run(capsys, "regress", "--table", t, "--auxiliary")
    assert "Poverty" in d[1]


def test_exit_codes(project, tmp_path, capsys):
    assert run(capsys, "entropy", "--votes", str(tmp_path / "missing.csv"),
               "--year", "2018")[0] == 1
    assert run(capsys, "entropy", "--votes", str(project / "election_2018.csv"),
               "--year", "1999")[0] == 2
    assert run(capsys, "report", "--config", str(tmp_path / "none.ini"))[0] == 2
    cfg = synth.SynthConfig(duplicate="gdp_per_capita", frames_per_province=2)
    table, _ = synth.generate(cfg)
    t = tmp_path / "dup.csv"
    t.write_text(table.to_csv())
    code, _, err = run(capsys, "regress", "--table", str(t), "--outcome", "h_unweighted",
                       "--regressors", "gdp_per_capita,gdp_per_capita_copy")
    assert code == 3 and "RankDeficient" in err


def test_synth_check(capsys):
    code, out, _ = run(capsys, "--seed", "9", "synth", "--check", "direct", "--frames", "3")
    assert code == 0 and json.loads(out)["verdict"] == "pass"


def test_distances(tmp_path, capsys):
    (tmp_path / "det.csv").write_text(
        "frame_id,cx,cy,bw,bh,cls,province,daynight,publish_month\n"
        "f1,0.1,0.5,0.05,0.2,NRP,Ankara,1,7\n"
        "f1,0.4,0.5,0.05,0.2,RP,Ankara,1,7\n"
        "f2,0.4,0.5,0.05,0.2,RP,Izmir,0,1\n")
    code, out, err = run(capsys, "distances", "--detections", str(tmp_path / "det.csv"),
                         "--aspect", "1")
    assert code == 0 and "skipped 1" in err
    lines = out.splitlines()
    assert len(lines) == 2 and lines[1].startswith("f1,")


def test_report_end_to_end(project, tmp_path, capsys):
    code, out, _ = run(capsys, "report", "--config", str(project / "pipeline.ini"),
                       "-o", str(tmp_path / "rep"))
    assert code == 0
    assert (tmp_path / "rep" / "regression_tables.txt").is_file()
    assert (tmp_path / "rep" / "manifest.json").is_file()


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "polarproxy", "--version"],
                       capture_output=True, text=True)
    assert p.returncode == 0 and "polarproxy" in p.stdout

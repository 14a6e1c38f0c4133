import json

import pytest

from polargen.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_pattern(capsys):
    code, out = run(capsys, "pattern", "--mode", "shorten", "--N", "8", "--P", "3")
    assert code == 0 and json.loads(out.out) == [4, 6, 8]
    code, out = run(capsys, "pattern", "--mode", "puncture", "--N", "8", "--M", "5")
    assert json.loads(out.out) == [1, 3, 5]


def test_construct_bec_puncture(capsys):
    code, out = run(capsys, "construct", "--N", "256", "--channel", "bec:0.5", "--mode", "puncture",
                    "--M", "186")
    d = json.loads(out.out)
    assert code == 0
    assert len(d["values"]) == 256 and d["metric"] == "bhattacharyya"
    assert len(d["code"]["pattern"]) == 70 and len(d["infoSet"]) == 93


def test_construct_bsc_writes_file(tmp_path, capsys):
    out = tmp_path / "q.json"
    code, _ = run(capsys, "construct", "--N", "16", "--channel", "bsc:0.1", "--mu", "8",
                  "--K", "8", "--out", str(out))
    d = json.loads(out.read_text())
    assert code == 0 and d["metric"] == "errorProb" and d["approxCalls"] == 64


def test_simulate_deterministic(tmp_path, capsys):
    args = ["simulate", "--N", "64", "--M", "48", "--mode", "puncture", "--channel", "bec",
            "--sweep", "0.2:0.3:0.05", "--seed", "3", "--max-frames", "2000", "--max-errors", "30"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--json", str(tmp_path / "r.json")]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = a.read_text().splitlines()
    assert rows[0] == "param,frames,errors,fer,ci_low,ci_high" and len(rows) == 4
    assert json.loads((tmp_path / "r.json").read_text())["config"]["schema"] == 1


def test_simulate_from_config(tmp_path, capsys):
    cfg = {"schema": 1, "channel": "bsc", "sweep": [0.05], "N": 32, "M": 32, "mode": "none",
           "mu": 8, "max_frames": 300, "max_errors": 20}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    code, out = run(capsys, "simulate", "--config", str(p))
    assert code == 0 and out.out.startswith("param,")


def test_folded_sim(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    code, out = run(capsys, "folded-sim", "--N", "16", "--L", "4", "--C", "4", "--frames", "20",
                    "--trace", str(trace))
    d = json.loads(out.out)
    assert code == 0 and d["latencyCycles"] == 3 and d["mismatches"] == 0
    assert trace.read_text().startswith("cycle,frame,stage,registers")


@pytest.mark.parametrize("argv", [
    ["simulate", "--channel", "bec", "--sweep", "0.1,abc"],
    ["simulate", "--channel", "bec", "--sweep", "0.3:0.1:0.1"],
    ["construct", "--channel", "bec"],
    ["construct", "--channel", "foo:1"],
    ["pattern", "--mode", "shorten", "--N", "8", "--bogus"],
    ["nosuch"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 2


@pytest.mark.parametrize("argv", [
    ["simulate", "--channel", "bec", "--sweep", "0.1", "--K", "300"],
    ["simulate", "--channel", "bec"],
    ["pattern", "--mode", "shorten", "--N", "8", "--P", "9"],
    ["folded-sim", "--N", "16", "--L", "64"],
])
def test_config_errors_exit_2(argv, capsys):
    code, out = run(capsys, *argv)
    assert code == 2 and "error" in out.err

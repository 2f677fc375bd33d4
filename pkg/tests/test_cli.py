import json

import pytest

from sigassoc.cli import run


@pytest.fixture(scope="module")
def synth(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    prefix = d / "g"
    assert run(["generate", "--n", "600", "--l", "4", "--mu", "0.5", "--density", "0.02",
                "--seed", "3", "--out-prefix", str(prefix)]) == 0
    return d, d / "g.edges.tsv", d / "g.attrs.tsv"


def _header_ok(path, manifest_name):
    first = path.read_text(encoding="utf-8").splitlines()[0]
    assert first == f"# manifest: {manifest_name}"


def test_generate_outputs(synth):
    d, edges, attrs = synth
    manifest = json.loads((d / "g.manifest.json").read_text())
    assert manifest["command"] == "generate" and manifest["seed"] == 3
    config = json.loads((d / "g.config.json").read_text())
    assert config["n"] == 600 and abs(config["realized_density"] - 0.02) < 0.004
    _header_ok(edges, "g.manifest.json")
    _header_ok(attrs, "g.manifest.json")


def test_mine_frequent_diff_stats(synth, capsys):
    d, edges, attrs = synth
    assoc = d / "assoc.jsonl"
    assert run(["mine", "--edges", str(edges), "--attrs", str(attrs), "--alpha", "0.01",
                "--size-support", "0.01", "--out", str(assoc)]) == 0
    manifest = json.loads((d / "assoc.manifest.json").read_text())
    assert set(manifest["inputs"]) == {str(edges), str(attrs)}
    assert all(len(h) == 64 for h in manifest["inputs"].values())
    assert manifest["parameters"]["alpha"] == 0.01
    assert {"sigassoc", "python", "numpy"} <= set(manifest["versions"])
    for name in manifest["outputs"]:
        _header_ok(d / name, "assoc.manifest.json")
    records = [json.loads(x) for x in assoc.read_text().splitlines()[1:]]
    pv = [r["pvalue"] for r in records]
    assert pv == sorted(pv) and all(p < 0.01 for p in pv)

    freq = d / "freq.csv"
    assert run(["frequent", "--edges", str(edges), "--attrs", str(attrs), "--sigma", "0.001",
                "--out", str(freq)]) == 0
    rows = freq.read_text().splitlines()
    assert rows[1] == "endpoint_a,endpoint_b,frequency"

    diff = d / "diff.jsonl"
    assert run(["diff", "--significant", str(assoc), "--frequent", str(freq), "--top-k", "15",
                "--out", str(diff)]) == 0
    out = [json.loads(x) for x in diff.read_text().splitlines()[1:]]
    assert len(out) == len(records)
    assert all("matched" in r for r in out)

    capsys.readouterr()
    assert run(["stats", "--edges", str(edges), "--attrs", str(attrs), "--name", "synthetic",
                "--assoc", str(assoc)]) == 0
    table = capsys.readouterr().out.splitlines()
    assert table[0] == "Dataset,Nodes,Edges,Density,AG Nodes,AG Edges"
    assert table[1].startswith("synthetic,600,")


def test_mine_csv_format(synth):
    d, edges, attrs = synth
    out = d / "assoc_csv.csv"
    assert run(["mine", "--edges", str(edges), "--attrs", str(attrs), "--format", "csv", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[1].startswith("sig_a,sig_b,strength,pvalue")


@pytest.mark.parametrize("mode", ["significant", "frequent", "jaccard"])
def test_predict(tmp_path, mode):
    run(["generate", "--n", "300", "--l", "3", "--density", "0.03", "--seed", "1",
         "--out-prefix", str(tmp_path / "t1")])
    run(["generate", "--n", "300", "--l", "3", "--density", "0.03", "--seed", "2",
         "--out-prefix", str(tmp_path / "t2")])
    out = tmp_path / "roc.csv"
    rc = run(["predict", "--base", str(tmp_path / "t1.edges.tsv"), "--future", str(tmp_path / "t2.edges.tsv"),
              "--attrs", str(tmp_path / "t1.attrs.tsv"), "--mode", mode, "--tau", "0.5", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "fpr,tpr" and lines[2] == "0.0,0.0"
    auc = float(lines[-1].split(",")[1])
    assert 0.0 <= auc <= 1.0
    summary = json.loads((tmp_path / "roc.manifest.json").read_text())["summary"]
    assert summary["negatives"] == 5 * summary["positives"]


def test_usage_errors(synth, capsys):
    d, edges, attrs = synth
    assert run([]) == 1
    assert run(["mine", "--bogus"]) == 1
    assert run(["mine", "--edges", str(edges), "--attrs", str(attrs), "--alpha", "1.5", "--out", str(d / "x.jsonl")]) == 1
    assert run(["generate", "--n", "10", "--theta", "1,2", "--out-prefix", str(d / "bad")]) == 1
    assert run(["nonsense"]) == 1
    assert run(["--version"]) == 0


def test_data_errors(tmp_path):
    attrs = tmp_path / "a.tsv"
    attrs.write_text("node\tx\n0\t1\n1\t0\n")
    edges = tmp_path / "e.tsv"
    edges.write_text("0\t0\n")
    assert run(["mine", "--edges", str(edges), "--attrs", str(attrs), "--out", str(tmp_path / "o.jsonl")]) == 2
    assert run(["mine", "--edges", str(tmp_path / "missing.tsv"), "--attrs", str(attrs),
                "--out", str(tmp_path / "o.jsonl")]) == 2
    edges.write_text("0\t7\n")
    assert run(["stats", "--edges", str(edges), "--attrs", str(attrs)]) == 2

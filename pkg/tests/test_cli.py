import json

import numpy as np
import pytest

from tsstyle import __version__
from tsstyle.cli import main, read_manifest
from tsstyle.csvio import ingest_csv, read_windows_csv


def run(*argv):
    return main(["--quiet", *map(str, argv)])


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert run("gen", "switching-ar1", "--t", 400, "--seed", 7, "--out", d / "sw.csv") == 0
    assert run("window", "--in", d / "sw.csv", "--w", 30, "--train", 300, "--out-prefix", d / "ds") == 0
    return d


def test_gen_writes_series_and_manifest(data):
    assert len(ingest_csv(data / "sw.csv")) == 400
    m = read_manifest(data / "sw.csv.manifest")
    assert m["command"] == "gen" and m["seed"] == "7" and m["version"] == __version__
    lines = (data / "sw.csv.manifest").read_text().splitlines()
    assert lines == sorted(lines)


def test_gen_default_horizon(tmp_path):
    assert run("gen", "switching-ar1", "--out", tmp_path / "a.csv") == 0
    assert len(ingest_csv(tmp_path / "a.csv")) == 3030


def test_gen_bytes_repeat(data, tmp_path):
    assert run("gen", "switching-ar1", "--t", 400, "--seed", 7, "--out", tmp_path / "again.csv") == 0
    assert (tmp_path / "again.csv").read_bytes() == (data / "sw.csv").read_bytes()


def test_gen_rejects_short_horizon(tmp_path, capsys):
    assert run("gen", "switching-ar1", "--t", 1, "--out", tmp_path / "x.csv") == 2
    assert "horizon" in capsys.readouterr().err


def test_window_split(data):
    tr, te = read_windows_csv(data / "ds.train.csv"), read_windows_csv(data / "ds.test.csv")
    assert (len(tr), len(te), tr.window_length) == (300, 70, 31)
    assert tr.windows.min() >= 0 and te.windows.max() <= 1


def test_window_bad_split(data):
    assert run("window", "--in", data / "sw.csv", "--train", 370, "--out-prefix", data / "bad") == 2


def test_window_parse_error(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("1\n2\nfoo\n4\n")
    assert run("window", "--in", tmp_path / "bad.csv", "--w", 2, "--train", 1, "--out-prefix", tmp_path / "o") == 1
    assert "row 3" in capsys.readouterr().err


def test_stylize_and_replay(data):
    out = data / "styled.csv"
    args = ["stylize", "--content", data / "ds.train.csv", "--style", data / "ds.train.csv", "--n", 12, "--iterations", 15, "--seed", 1, "--out", out]
    assert run(*args) == 0
    ds = read_windows_csv(out)
    assert len(ds) == 12 and set(ds.meta[0]) == {"n", "content_idx", "style_idx", "seed"}
    m = read_manifest(str(out) + ".manifest")
    assert m["alpha"] == "1.0" and m["beta"] == "10.0" and m["gamma"] == "0.0001"
    first = out.read_bytes(), (data / "styled.meta.csv").read_bytes()
    out.unlink()
    assert run("replay", str(out) + ".manifest") == 0
    assert (out.read_bytes(), (data / "styled.meta.csv").read_bytes()) == first


def test_stylize_perturbed(data):
    out = data / "pert.csv"
    assert run("stylize", "--content", data / "ds.train.csv", "--style", data / "ds.train.csv", "--n", 5,
               "--iterations", 5, "--perturb", "--shock-amp", "0:2", "--shock-shift", "8:23", "--out", out) == 0
    assert read_manifest(str(out) + ".manifest")["shock_shift"] == "8:23"


def test_stylize_rejects_zero_samples(data):
    assert run("stylize", "--content", data / "ds.train.csv", "--style", data / "ds.train.csv", "--n", 0, "--out", data / "z.csv") == 2


def test_stylize_bad_range(data):
    with pytest.raises(SystemExit) as info:
        run("stylize", "--content", "a", "--style", "b", "--n", 1, "--shock-amp", "3:1", "--out", "c")
    assert info.value.code == 2


def test_augment(data):
    src = data / "ds.train.csv"
    assert run("augment", "--in", src, "--method", "flip", "--out", data / "f1.csv") == 0
    assert run("augment", "--in", data / "f1.csv", "--method", "flip", "--out", data / "f2.csv") == 0
    np.testing.assert_allclose(read_windows_csv(data / "f2.csv").windows, read_windows_csv(src).windows, rtol=0, atol=1e-12)
    assert run("augment", "--in", src, "--method", "jitter", "--sigma", 0, "--out", data / "j.csv") == 0
    assert (data / "j.csv").read_bytes() == src.read_bytes()
    for name in ("t1.csv", "t2.csv"):
        assert run("augment", "--in", src, "--method", "timewarp", "--knots", 4, "--warp-std", 0.2, "--seed", 3, "--out", data / name) == 0
    assert (data / "t1.csv").read_bytes() == (data / "t2.csv").read_bytes()


def test_eval_identity(data):
    out = data / "r.json"
    assert run("eval", "--real-train", data / "ds.train.csv", "--real-test", data / "ds.test.csv",
               "--synth", data / "ds.train.csv", "--out", out) == 0
    rec = json.loads(out.read_text())
    assert list(rec) == ["precision", "recall", "f_score", "authenticity", "tstr_mae", "trtr_mae"]
    assert rec["f_score"] == 1.0 and rec["authenticity"] == 0.0


def test_eval_augment_level_csv(data):
    out = data / "r.csv"
    assert run("eval", "--real-train", data / "ds.train.csv", "--real-test", data / "ds.test.csv",
               "--synth", data / "f1.csv", "--augment-level", 5, "--out", out) == 0
    keys = [line.split(",")[0] for line in out.read_text().splitlines()[1:]]
    assert "aug_mae" in keys and "tstr_mae" not in keys


def test_eval_requires_synth(data, capsys):
    with pytest.raises(SystemExit) as info:
        run("eval", "--real-train", data / "ds.train.csv", "--real-test", data / "ds.test.csv", "--out", data / "r.csv")
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_eval_length_mismatch(data, tmp_path):
    assert run("window", "--in", data / "sw.csv", "--w", 20, "--train", 300, "--out-prefix", tmp_path / "short") == 0
    assert run("eval", "--real-train", data / "ds.train.csv", "--real-test", data / "ds.test.csv",
               "--synth", tmp_path / "short.train.csv", "--out", tmp_path / "r.csv") == 1


def test_summary_line(data, capsys):
    main(["gen", "switching-ar1", "--t", "50", "--out", str(data / "s50.csv")])
    assert capsys.readouterr().out.startswith("wrote 50 values")

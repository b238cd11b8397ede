import json

import numpy as np
import pytest

from canmsg.can_log import dumps_log, load_log
from canmsg.cli import build_parser, main
from canmsg.detect import CpdConfig, change_point_detect
from canmsg.similarity import SimilaritySeries

from .conftest import benign_log, frames_from_pids


@pytest.fixture
def small_log(tmp_path):
    path = tmp_path / "b.log"
    path.write_text(dumps_log(frames_from_pids([str(100 + i % 7) for i in range(300)])))
    return path


def run(*argv):
    return main([str(a) for a in argv])


def test_similarity_300_frames(small_log, tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert run("similarity", small_log, "-o", out) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "# window_size=100 stride=100"
    assert len(rows) == 2 + 2


def test_similarity_short_log_warns(tmp_path, capsys):
    path = tmp_path / "short.log"
    path.write_text(dumps_log(frames_from_pids(["1", "2"] * 75)))
    assert run("similarity", path) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines() == ["# window_size=100 stride=100", "pair_index,metric,value,label,degenerate_flag"]
    assert "50 trailing frames discarded" in captured.err


def test_missing_file_exit_2(tmp_path, capsys):
    missing = tmp_path / "nope.log"
    assert run("similarity", missing) == 2
    assert str(missing) in capsys.readouterr().err


def test_strict_parse_abort_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.log"
    path.write_text("(1.0) can0 100#00\ngarbage\n")
    assert run("similarity", path, "--strict") == 2
    assert "line 2" in capsys.readouterr().err
    assert run("similarity", path, "--window-size", "2") == 0


def test_usage_errors_exit_1(small_log, capsys):
    with pytest.raises(SystemExit) as info:
        run("similarity", small_log, "--no-such-flag")
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        run("frobnicate")
    assert info.value.code == 1
    assert run("similarity", small_log, "--window-size", "1") == 1


def test_generate_inject_counts_and_determinism(tmp_path):
    g1, g2 = tmp_path / "g1.log", tmp_path / "g2.log"
    assert run("generate", "--length", 1000, "--seed", 9, "-o", g1) == 0
    assert run("generate", "--length", 1000, "--seed", 9, "-o", g2) == 0
    assert g1.read_bytes() == g2.read_bytes()
    assert g1.read_text().startswith("# canmsg generate seed=9")

    i1, l1 = tmp_path / "i1.log", tmp_path / "i1.lab"
    i2 = tmp_path / "i2.log"
    assert run("inject", g1, "--start", 200, "--end", 800, "-o", i1, "--labels-out", l1) == 0
    assert run("inject", g1, "--start", 200, "--end", 800, "-o", i2) == 0
    assert i1.read_bytes() == i2.read_bytes()
    assert len(load_log(i1)) == 1600
    labels = l1.read_text().split()
    assert len(labels) == 1600 and labels.count("1") == 600
    assert "seed=0" in i1.read_text().splitlines()[0]


def test_inject_interval_out_of_range_exit_1(tmp_path, capsys):
    g = tmp_path / "g.log"
    run("generate", "--length", 100, "-o", g)
    assert run("inject", g, "--end", 500, "-o", tmp_path / "x.log") == 1
    assert "500" in capsys.readouterr().err


def _labelled_attack(tmp_path):
    g, lab_g = tmp_path / "g.log", tmp_path / "g.lab"
    i, lab_i = tmp_path / "i.log", tmp_path / "i.lab"
    run("generate", "--length", 9000, "--seed", 2, "-o", g, "--labels-out", lab_g)
    run("inject", g, "--labels", lab_g, "--start", 3000, "--end", 6000, "-o", i, "--labels-out", lab_i)
    return g, i, lab_i


def test_detect_threshold_json(tmp_path, capsys):
    _, i, lab = _labelled_attack(tmp_path)
    out = tmp_path / "r.json"
    assert run("detect-threshold", i, "--labels", lab, "--window-size", 50, "--calibrate", "-o", out) == 0
    doc = json.loads(out.read_text())
    assert {"tp", "fp", "tn", "fn", "accuracy", "false_positive_rate"} <= set(doc)
    assert doc["accuracy"] >= 0.9
    assert "accuracy=" in capsys.readouterr().err


def test_detect_threshold_from_csv(tmp_path):
    csv_path = tmp_path / "s.csv"
    with open(csv_path, "w") as fh:
        SimilaritySeries("pearson", [0.95, 0.5, 0.9], 100, labels=[False, True, False]).to_csv(fh)
    out = tmp_path / "r.json"
    assert run("detect-threshold", csv_path, "-o", out, "--verdicts-csv", tmp_path / "v.csv") == 0
    doc = json.loads(out.read_text())
    assert doc["accuracy"] == 1.0 and doc["parameters"]["threshold"] == 0.87
    assert (tmp_path / "v.csv").read_text().splitlines()[2] == "1,attack,injected"


def test_detect_cpd_two_level(tmp_path, capsys):
    rng = np.random.default_rng(0)
    values = np.concatenate([rng.normal(0.95, 0.01, 200), rng.normal(0.80, 0.01, 200)])
    csv_path = tmp_path / "s.csv"
    with open(csv_path, "w") as fh:
        SimilaritySeries("cosine", values, 100).to_csv(fh)
    out, post = tmp_path / "c.json", tmp_path / "post.csv"
    argv = ["detect-cpd", csv_path, "--samples", 5000, "--burn-in", 2000, "-o", out, "--posterior-csv", post]
    assert run(*argv) == 0
    doc = json.loads(out.read_text())
    assert 190 <= doc["tau_point"] <= 210 and doc["changed"] is True
    assert "tau=" in capsys.readouterr().err
    assert len(post.read_text().splitlines()) == 401
    direct = change_point_detect(SimilaritySeries("cosine", values, 100), CpdConfig(5000, 2000))
    assert doc == direct.summary()


def test_lstm_without_checkpoint_is_usage_error(tmp_path, capsys):
    g, i, _ = _labelled_attack(tmp_path)
    assert run("predict-lstm", "--benign", g, "--injected", i) == 1
    assert "--checkpoint" in capsys.readouterr().err


def test_train_then_predict(tmp_path):
    g, i, _ = _labelled_attack(tmp_path)
    ckpt, hist = tmp_path / "m.json", tmp_path / "h.csv"
    common = ["--benign", g, "--injected", i, "--window-size", 50, "--epochs", 3, "--input-units", 8, "--hidden-units", 4]
    assert run("train-lstm", *common, "--checkpoint", ckpt, "--history", hist) == 0
    assert len(hist.read_text().splitlines()) == 4
    out = tmp_path / "p.json"
    assert run("predict-lstm", *common, "--checkpoint", ckpt, "-o", out) == 0
    doc = json.loads(out.read_text())
    assert doc["detector"] == "lstm" and 0.0 <= doc["accuracy"] <= 1.0


def test_eval_sweep(tmp_path):
    _, i, lab = _labelled_attack(tmp_path)
    sweep, out = tmp_path / "sweep.csv", tmp_path / "e.json"
    argv = ["eval", i, "--labels", lab, "--window-sizes", "50,100", "--samples", 2000, "--burn-in", 500,
            "--sweep-csv", sweep, "-o", out]
    assert run(*argv) == 0
    rows = sweep.read_text().splitlines()
    assert len(rows) == 1 + 2 * 2 * 2
    doc = json.loads(out.read_text())
    assert all("t_test" in r for r in doc["runs"])


def test_export_dot(small_log, capsys):
    assert run("export-dot", small_log, "--window-size", 10, "--window-index", 1) == 0
    assert capsys.readouterr().out.startswith("digraph msg_1 {")
    assert run("export-dot", small_log, "--window-index", 99) == 1


def test_svg_output(small_log, tmp_path):
    svg = tmp_path / "s.svg"
    assert run("similarity", small_log, "--window-size", 20, "-o", tmp_path / "s.csv", "--svg", svg) == 0
    text = svg.read_text()
    assert text.startswith("<svg") and "<polyline" in text


def test_channel_filter(tmp_path):
    frames = frames_from_pids(["1", "2"] * 100) + frames_from_pids(["3", "4"] * 100, bus="can1", t0_us=9_000_000)
    path = tmp_path / "mixed.log"
    path.write_text(dumps_log(frames))
    out = tmp_path / "s.csv"
    assert run("similarity", path, "--window-size", 50, "--channel", "can1", "-o", out) == 0
    assert len(out.read_text().splitlines()) == 2 + 3


@pytest.mark.parametrize(
    "sub, expected",
    [
        ("similarity", ["default: 100", "default: pearson", "default: can0", "default: None"]),
        ("detect-threshold", ["default: 0.87"]),
        ("detect-cpd", ["default: 20000", "default: 5000", "default: 1.0", "default: 0"]),
        ("train-lstm", ["default: 42", "default: 12", "default: 0.2", "default: 0.01", "default: 128", "default: 2/3", "default: 10"]),
        ("inject", ["default: 7DF", "default: FFFF", "default: 1"]),
    ],
)
def test_help_lists_defaults(sub, expected, capsys):
    with pytest.raises(SystemExit) as info:
        main([sub, "--help"])
    assert info.value.code == 0
    text = " ".join(capsys.readouterr().out.split())
    for item in expected:
        assert item in text, item


def test_every_option_has_help():
    parser = build_parser()
    subs = next(a for a in parser._actions if a.__class__.__name__ == "_SubParsersAction")
    for name, sp in subs.choices.items():
        for action in sp._actions:
            assert action.help, (name, action.dest)

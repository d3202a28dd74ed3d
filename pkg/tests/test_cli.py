import csv
import json
import socket
import subprocess
import sys

import pytest

from gaze9.cli import main
from gaze9.t9 import selection_stream

HELLO_PICKS = [(4, 5), (3, 5), (5, 6), (5, 6), (6, 6)]


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    code = main(["gen-data", "--dataset", str(root), "--width", "64",
                 "--train", "3", "--val", "2",
                 "--test-known", "2", "--test-unknown", "2", "--seed", "5"])
    assert code == 0
    return root


@pytest.fixture(scope="module")
def trained(dataset, tmp_path_factory):
    weights = tmp_path_factory.mktemp("model") / "tiny.g9w"
    code = main(["train", "--dataset", str(dataset), "--weights", str(weights),
                 "--epochs", "1", "--steps-per-epoch", "2",
                 "--batch-size", "4", "--seed", "1"])
    assert code == 0
    return weights


class TestGenData:
    def test_writes_manifest_and_images(self, dataset):
        manifest = dataset / "manifest.jsonl"
        assert manifest.exists()
        lines = manifest.read_text().strip().splitlines()
        assert len(lines) == (3 + 2 + 2 + 2) * 10
        assert len(list(dataset.glob("images/**/*.png"))) == len(lines)

    def test_zero_count_splits_are_omitted(self, tmp_path, capsys):
        code = main(["gen-data", "--dataset", str(tmp_path / "d"),
                     "--width", "64", "--train", "1", "--val", "0",
                     "--test-known", "0", "--test-unknown", "0"])
        assert code == 0
        assert "val" not in capsys.readouterr().out.replace("val: ", "")


class TestTrain:
    def test_writes_weights_and_history(self, trained):
        assert trained.exists()
        history = trained.with_name("tiny-history.csv")
        rows = history.read_text().strip().splitlines()
        assert rows[0] == "epoch,loss,val_top1"
        assert len(rows) == 2  # one epoch

    def test_missing_dataset_is_exit_3(self, tmp_path):
        code = main(["train", "--dataset", str(tmp_path / "nope"),
                     "--weights", str(tmp_path / "w.g9w")])
        assert code == 3

    def test_corrupt_manifest_is_exit_4(self, tmp_path):
        root = tmp_path / "d"
        (root / "images").mkdir(parents=True)
        (root / "manifest.jsonl").write_text("not json\n")
        code = main(["train", "--dataset", str(root),
                     "--weights", str(tmp_path / "w.g9w")])
        assert code == 4


class TestEval:
    def test_prints_a_table_and_writes_the_report(self, dataset, trained,
                                                  tmp_path, capsys):
        report = tmp_path / "report.json"
        code = main(["eval", "--dataset", str(dataset),
                     "--weights", str(trained), "--report", str(report)])
        assert code == 0
        out = capsys.readouterr().out
        assert "top1 acc." in out and "top2 acc." in out
        for split in ("train", "val", "test-known", "test-unknown"):
            assert split in out
        parsed = json.loads(report.read_text())
        assert set(parsed) == {"train", "val", "test-known", "test-unknown"}
        assert 0.0 <= parsed["test-known"]["top1"] <= 100.0

    def test_single_split_selection(self, dataset, trained, capsys):
        code = main(["eval", "--dataset", str(dataset),
                     "--weights", str(trained), "--split", "val"])
        assert code == 0
        out = capsys.readouterr().out
        assert "val" in out and "test-known" not in out

    def test_garbage_weights_are_exit_4(self, dataset, tmp_path):
        bad = tmp_path / "bad.g9w"
        bad.write_bytes(b"XXXX not a weight file")
        assert main(["eval", "--dataset", str(dataset),
                     "--weights", str(bad)]) == 4


class TestSimulate:
    def test_sweep_trace_reaches_all_states_in_order(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        code = main(["simulate", "--out", str(out), "--seed", "3"])
        assert code == 0
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["frame", "raw", "filtered"]
        filtered = [int(r[2]) for r in rows[1:] if r[2] != ""]
        collapsed = [filtered[0]]
        for f in filtered[1:]:
            if f != collapsed[-1]:
                collapsed.append(f)
        assert collapsed == list(range(10))

    def test_script_file_round_trip(self, tmp_path):
        from gaze9.filtering import NoiseScript
        script_path = tmp_path / "script.json"
        script_path.write_text(
            NoiseScript(segments=((5, 40), (4, 40))).to_json())
        out = tmp_path / "trace.csv"
        assert main(["simulate", "--script", str(script_path),
                     "--out", str(out)]) == 0
        assert out.exists()

    def test_missing_script_is_exit_3(self, tmp_path):
        assert main(["simulate", "--script", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "t.csv")]) == 3


class TestType:
    def write_replay(self, path, states):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frame", "state"])
            for i, s in enumerate(states):
                writer.writerow([i, s])

    def test_hello_replay(self, tmp_path, capsys):
        replay = tmp_path / "hello.csv"
        self.write_replay(replay, selection_stream(HELLO_PICKS))
        code = main(["type", "--script", str(replay), "--reference", "hello"])
        assert code == 0
        out = capsys.readouterr().out
        assert "text: 'hello'" in out
        assert "error rate: 0.0000" in out

    def test_headerless_replay_is_exit_4(self, tmp_path):
        replay = tmp_path / "r.csv"
        replay.write_text("0;5\n")
        assert main(["type", "--script", str(replay)]) == 4

    def test_simulate_output_feeds_type(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        main(["simulate", "--out", str(out)])
        capsys.readouterr()
        assert main(["type", "--script", str(out)]) == 0
        assert "text:" in capsys.readouterr().out


class TestUsage:
    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as info:
            main(["simulate", "--frobnicate"])
        assert info.value.code == 2

    def test_no_command_exits_2(self):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 2


class TestServe:
    def test_serves_until_terminated(self):
        proc = subprocess.Popen(
            [sys.executable, "-m", "gaze9.cli", "serve",
             "--listen", "127.0.0.1:0"],
            stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
        try:
            banner = proc.stdout.readline()
            assert banner.startswith("listening on ")
            host, _, port = banner.strip().rpartition(" ")[2].rpartition(":")
            with socket.create_connection((host, int(port)), timeout=10) as sock:
                sock.settimeout(10)
                fh = sock.makefile("rwb")
                fh.write(b'{"type": "reset"}\n')
                fh.flush()
                reply = json.loads(fh.readline())
                assert reply["type"] == "ui_state" and reply["text"] == ""
        finally:
            proc.terminate()
            proc.wait(timeout=10)

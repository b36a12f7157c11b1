import json

import pytest

from marginrank.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRank:
    def test_two_node_lsq(self, tmp_path, capsys):
        edges = tmp_path / "edges.csv"
        edges.write_text("left_id,right_id,margin\na,b,2.0\n")
        out = tmp_path / "board.csv"
        code, _, _ = run(capsys, "rank", str(edges), "-o", str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines == ["video_id,score,rank", "a,1.000000,1", "b,-1.000000,2"]

    def test_three_cycle_formatting(self, tmp_path, capsys):
        edges = tmp_path / "edges.csv"
        edges.write_text("left_id,right_id,margin\na,b,1\nb,c,1\na,c,3\n")
        out = tmp_path / "board.csv"
        code, _, _ = run(capsys, "rank", str(edges), "-o", str(out), "--method", "lsq")
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "a,1.333333,1"
        assert lines[2] == "b,0.000000,2"
        assert lines[3] == "c,-1.333333,3"

    def test_empty_edges_with_id_list(self, tmp_path, capsys):
        edges = tmp_path / "edges.csv"
        edges.write_text("left_id,right_id,margin\n")
        ids = tmp_path / "ids.txt"
        ids.write_text("a\nb\nc\n")
        out = tmp_path / "board.csv"
        code, _, err = run(capsys, "rank", str(edges), "-o", str(out), "--ids", str(ids))
        assert code == 0
        assert "warning" in err.lower()
        lines = out.read_text().splitlines()
        assert lines[1:] == ["a,0.000000,1", "b,0.000000,1", "c,0.000000,1"]

    def test_disconnected_graph_warns(self, tmp_path, capsys):
        edges = tmp_path / "edges.csv"
        edges.write_text("left_id,right_id,margin\na,b,1.0\nc,d,1.0\n")
        out = tmp_path / "board.csv"
        code, _, err = run(capsys, "rank", str(edges), "-o", str(out))
        assert code == 0
        assert "2 connected components" in err

    def test_malformed_row_exits_2(self, tmp_path, capsys):
        edges = tmp_path / "edges.csv"
        edges.write_text("left_id,right_id,margin\na,b,1.0\na,c,not-a-number\n")
        out = tmp_path / "board.csv"
        code, _, err = run(capsys, "rank", str(edges), "-o", str(out))
        assert code == 2
        assert "row 3" in err
        assert not out.exists()  # no partial artifact

    def test_unknown_method_exits_2(self, tmp_path, capsys):
        edges = tmp_path / "edges.csv"
        edges.write_text("left_id,right_id,margin\na,b,1.0\n")
        code, _, _ = run(capsys, "rank", str(edges), "-o", str(tmp_path / "x.csv"),
                         "--method", "magic")
        assert code == 2

    def test_elo_method(self, tmp_path, capsys):
        edges = tmp_path / "edges.csv"
        edges.write_text("left_id,right_id,margin\na,b,1.0\n")
        out = tmp_path / "board.csv"
        code, _, _ = run(capsys, "rank", str(edges), "-o", str(out), "--method", "elo")
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "a,1516.000000,1"


class TestSamplePairs:
    def test_minimal(self, tmp_path, capsys):
        out = tmp_path / "pairs.csv"
        code, _, _ = run(capsys, "sample-pairs", "--n", "2", "--num-batches", "1",
                         "--batch-size", "1", "--seed", "0", "-o", str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "left_id,right_id"
        assert sorted(lines[1].split(",")) == ["0", "1"]

    def test_coverage_at_5n(self, tmp_path, capsys):
        out = tmp_path / "pairs.csv"
        code, _, _ = run(capsys, "sample-pairs", "--n", "100", "--num-batches", "10",
                         "--batch-size", "50", "--seed", "3", "-o", str(out))
        assert code == 0
        lines = out.read_text().splitlines()[1:]
        assert len(lines) == 500
        seen = {v for line in lines for v in line.split(",")}
        assert seen == {str(i) for i in range(100)}

    def test_batch_size_zero_exits_2(self, tmp_path, capsys):
        code, _, _ = run(capsys, "sample-pairs", "--n", "4", "--batch-size", "0",
                         "-o", str(tmp_path / "p.csv"))
        assert code == 2

    def test_reproducible_output(self, tmp_path, capsys):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            run(capsys, "sample-pairs", "--n", "20", "--num-batches", "3",
                "--batch-size", "8", "--seed", "11", "-o", str(out))
        assert out1.read_bytes() == out2.read_bytes()


class TestSimulate:
    def test_noiseless_synthetic(self, tmp_path, capsys):
        outdir = tmp_path / "run"
        code, out, _ = run(capsys, "simulate", "--synthetic", "40", "--seeds", "0",
                           "--methods", "lsq", "--outdir", str(outdir))
        assert code == 0
        assert "lsq: median srcc stability budget" in out
        summary = json.loads((outdir / "summary.json").read_text())
        assert summary["aggregate"]["lsq"]["srcc"]["final_value"] == pytest.approx(1.0)
        csv_lines = (outdir / "convergence.csv").read_text().splitlines()
        assert csv_lines[0] == "budget,method,metric,value"
        assert csv_lines[-1].split(",")[0] == "200"  # 5 * 40

    def test_mos_file(self, tmp_path, capsys):
        mos = tmp_path / "mos.csv"
        mos.write_text("video_id,mos\n" + "".join(
            f"v{i},{1.0 + (i % 9) * 0.45:.2f}\n" for i in range(30)
        ))
        outdir = tmp_path / "run"
        code, _, _ = run(capsys, "simulate", "--mos", str(mos), "--seeds", "0,1",
                         "--methods", "lsq,winrate", "--sigma", "0.1",
                         "--outdir", str(outdir))
        assert code == 0
        assert (outdir / "convergence.csv").exists()

    def test_missing_mos_exits_2(self, tmp_path, capsys):
        code, _, err = run(capsys, "simulate", "--mos", str(tmp_path / "nope.csv"),
                           "--outdir", str(tmp_path / "run"))
        assert code == 2
        assert "nope.csv" in err

    def test_byte_identical_reruns_and_worker_counts(self, tmp_path, capsys):
        outputs = []
        for name, workers in (("r1", "1"), ("r2", "1"), ("r4", "4")):
            outdir = tmp_path / name
            code, _, _ = run(capsys, "simulate", "--synthetic", "25",
                             "--seeds", "0,1,2", "--sigma", "0.3",
                             "--workers", workers, "--outdir", str(outdir))
            assert code == 0
            outputs.append(
                (outdir / "convergence.csv").read_bytes()
                + (outdir / "summary.json").read_bytes()
            )
        assert outputs[0] == outputs[1] == outputs[2]


class TestMetrics:
    def make_csv(self, path, pairs):
        path.write_text("video_id,score\n" + "".join(f"{k},{v}\n" for k, v in pairs))

    def test_identical_files(self, tmp_path, capsys):
        f = tmp_path / "a.csv"
        self.make_csv(f, [("a", 1.0), ("b", 2.0), ("c", 3.0)])
        code, out, _ = run(capsys, "metrics", str(f), str(f))
        assert code == 0
        assert "srcc 1.0000" in out
        assert "plcc 1.0000" in out

    def test_reversed_ordering(self, tmp_path, capsys):
        pred = tmp_path / "pred.csv"
        truth = tmp_path / "truth.csv"
        self.make_csv(pred, [("a", 3.0), ("b", 2.0), ("c", 1.0)])
        self.make_csv(truth, [("a", 1.0), ("b", 2.0), ("c", 3.0)])
        code, out, _ = run(capsys, "metrics", str(pred), str(truth))
        assert code == 0
        assert "srcc -1.0000" in out

    def test_hand_computed_srcc(self, tmp_path, capsys):
        pred = tmp_path / "pred.csv"
        truth = tmp_path / "truth.csv"
        self.make_csv(pred, [("a", 1), ("b", 2), ("c", 3), ("d", 4)])
        self.make_csv(truth, [("a", 1), ("b", 3), ("c", 2), ("d", 4)])
        code, out, _ = run(capsys, "metrics", str(pred), str(truth))
        assert code == 0
        assert "srcc 0.8000" in out

    def test_id_mismatch_exits_2(self, tmp_path, capsys):
        pred = tmp_path / "pred.csv"
        truth = tmp_path / "truth.csv"
        self.make_csv(pred, [("a", 1.0), ("b", 2.0)])
        self.make_csv(truth, [("a", 1.0), ("zz", 2.0)])
        code, _, err = run(capsys, "metrics", str(pred), str(truth))
        assert code == 2
        assert "'b'" in err

    def test_group_rewards(self, capsys):
        code, out, _ = run(capsys, "metrics", "--group-rewards", "0,2",
                           "--eps-std", "1e-12")
        assert code == 0
        assert "advantages -1.0000 1.0000" in out

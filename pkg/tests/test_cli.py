"""Command-line interface: subcommands, exit codes, manifests."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from gadkit.cli import main
from gadkit.io import read_float_map, read_labels, write_float_map, write_labels
from gadkit.labels import LabelMap


@pytest.fixture
def runner():
    return CliRunner()


def _invoke(runner, args):
    return runner.invoke(main, args, catch_exceptions=False)


def _parse_kv(output):
    out = {}
    for line in output.splitlines():
        if "=" in line:
            key, _, value = line.partition("=")
            out[key] = value
    return out


@pytest.fixture
def square_dir(tmp_path, runner):
    out = tmp_path / "square"
    result = _invoke(runner, ["synth", "square", "--seed", "0", "--out-dir", str(out)])
    assert result.exit_code == 0
    return out


class TestGad:
    def test_zero_iterations_byte_identical(self, tmp_path, runner):
        rng = np.random.default_rng(0)
        src = tmp_path / "in.pfm"
        write_float_map(src, rng.random((1, 8, 8)))
        out = tmp_path / "out.pfm"
        result = _invoke(
            runner,
            ["gad", str(src), str(src), "--K", "0.1", "--iters", "0", "--out", str(out)],
        )
        assert result.exit_code == 0
        assert src.read_bytes() == out.read_bytes()

    def test_unstable_lambda_exit_2(self, tmp_path, runner):
        src = tmp_path / "in.pfm"
        write_float_map(src, np.zeros((1, 4, 4)))
        result = runner.invoke(
            main, ["gad", str(src), str(src), "--lambda", "0.3", "--out", str(tmp_path / "o.pfm")]
        )
        assert result.exit_code == 2
        assert "unstable" in result.output

    def test_duplicate_guides_identical_output(self, tmp_path, runner):
        rng = np.random.default_rng(1)
        tgt = tmp_path / "t.pfm"
        gde = tmp_path / "g.pfm"
        write_float_map(tgt, rng.random((1, 8, 8)))
        write_float_map(gde, rng.random((3, 8, 8)))
        out1, out2 = tmp_path / "o1.pfm", tmp_path / "o2.pfm"
        args = ["--K", "0.1", "--iters", "20"]
        assert _invoke(runner, ["gad", str(tgt), str(gde), *args, "--out", str(out1)]).exit_code == 0
        assert _invoke(runner, ["gad", str(tgt), str(gde), str(gde), *args, "--out", str(out2)]).exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_missing_file_exit_2(self, tmp_path, runner):
        result = runner.invoke(
            main, ["gad", str(tmp_path / "nope.pfm"), "--out", str(tmp_path / "o.pfm")]
        )
        assert result.exit_code == 2  # click path validation

    def test_output_roundtrip_matches_memory(self, tmp_path, runner):
        from gadkit import GadParams, gad_filter

        rng = np.random.default_rng(2)
        tgt_arr = rng.random((1, 8, 8)).astype(np.float32).astype(np.float64)
        gde_arr = rng.random((3, 8, 8)).astype(np.float32).astype(np.float64)
        tgt, gde = tmp_path / "t.pfm", tmp_path / "g.pfm"
        write_float_map(tgt, tgt_arr)
        write_float_map(gde, gde_arr)
        out = tmp_path / "o.pfm"
        _invoke(runner, ["gad", str(tgt), str(gde), "--K", "0.1", "--iters", "10", "--out", str(out)])
        expected = gad_filter(tgt_arr, [gde_arr], GadParams(contrast=0.1, step=0.24, iterations=10))
        np.testing.assert_array_equal(
            read_float_map(out), expected.astype(np.float32).astype(np.float64)
        )

    def test_manifest_written(self, tmp_path, runner):
        src = tmp_path / "in.pfm"
        write_float_map(src, np.zeros((1, 4, 4)))
        out = tmp_path / "o.pfm"
        _invoke(runner, ["gad", str(src), str(src), "--iters", "0", "--out", str(out)])
        manifest = json.loads((tmp_path / "o.pfm.manifest.json").read_text())
        assert manifest["command"] == "gad"
        assert manifest["params"]["iters"] == 0
        assert "timings_s" in manifest


class TestSynth:
    def test_same_seed_identical_data(self, tmp_path, runner):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert _invoke(runner, ["synth", "square", "--seed", "5", "--out-dir", str(out)]).exit_code == 0
        for name in ("guide.pfm", "truth.png", "labels.png", "prob.pfm"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_disk_outputs(self, tmp_path, runner):
        out = tmp_path / "disk"
        assert _invoke(runner, ["synth", "disk", "--size", "64", "--out-dir", str(out)]).exit_code == 0
        onehot0 = read_float_map(out / "onehot_0.pfm")
        onehot1 = read_float_map(out / "onehot_1.pfm")
        np.testing.assert_allclose(onehot0 + onehot1, 1.0)


class TestCleanse:
    def test_square_scenario_report(self, square_dir, runner, tmp_path):
        out = tmp_path / "cleansed.png"
        result = _invoke(
            runner,
            [
                "cleanse",
                str(square_dir / "labels.png"),
                str(square_dir / "prob.pfm"),
                str(square_dir / "guide.pfm"),
                "--K", "0.05",
                "--truth", str(square_dir / "truth.png"),
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0
        kv = _parse_kv(result.output)
        # frozen values from the library-level reference-kernel run
        assert float(kv["dice_before"]) == pytest.approx(8 / 13, abs=1e-6)
        assert float(kv["dice_after"]) == pytest.approx(1.0, abs=1e-6)

    def test_prediction_equals_gt_identity(self, tmp_path, runner):
        rng = np.random.default_rng(3)
        ids = rng.integers(0, 2, size=(8, 8)).astype(np.uint8)
        gt = tmp_path / "gt.png"
        write_labels(gt, LabelMap(ids))
        prob = tmp_path / "prob.pfm"
        write_float_map(prob, ids.astype(np.float64)[np.newaxis])
        guide = tmp_path / "g.pfm"
        write_float_map(guide, rng.random((1, 8, 8)))
        for strategy in ("intersection", "ignore-fn", "ignore-all"):
            out = tmp_path / f"out_{strategy}.png"
            result = _invoke(
                runner,
                ["cleanse", str(gt), str(prob), str(guide), "--strategy", strategy,
                 "--iters", "0", "--out", str(out)],
            )
            assert result.exit_code == 0
            np.testing.assert_array_equal(read_labels(out).ids, ids)

    def test_unknown_strategy_exit_2(self, square_dir, runner, tmp_path):
        result = runner.invoke(
            main,
            ["cleanse", str(square_dir / "labels.png"), str(square_dir / "prob.pfm"),
             str(square_dir / "guide.pfm"), "--strategy", "union",
             "--out", str(tmp_path / "o.png")],
        )
        assert result.exit_code == 2


class TestMergeEval:
    def test_merge_then_eval_perfect(self, tmp_path, runner):
        rng = np.random.default_rng(4)
        ids = rng.integers(0, 2, size=(10, 10)).astype(np.uint8)
        a = tmp_path / "a.png"
        write_labels(a, LabelMap(ids))
        merged = tmp_path / "m.png"
        result = _invoke(runner, ["merge", str(a), str(a), "--out", str(merged)])
        assert result.exit_code == 0
        result = _invoke(runner, ["eval", str(merged), str(a)])
        kv = _parse_kv(result.output)
        assert float(kv["accuracy"]) == 1.0
        assert float(kv["dice_1"]) == 1.0

    def test_eval_json_output(self, tmp_path, runner):
        ids = np.array([[0, 1], [1, 0]], dtype=np.uint8)
        a = tmp_path / "a.png"
        write_labels(a, LabelMap(ids))
        jout = tmp_path / "metrics.json"
        result = _invoke(runner, ["eval", str(a), str(a), "--boundary-radius", "1", "--json", str(jout)])
        assert result.exit_code == 0
        data = json.loads(jout.read_text())
        assert data["accuracy"] == 1.0


class TestRefine:
    def test_per_class_probability_files(self, tmp_path, runner):
        from gadkit.synth import disk_scenario
        from gadkit import simulate_low_res

        sc = disk_scenario(seed=0, size=64)
        low = simulate_low_res(sc.onehot, 4)
        p0, p1 = tmp_path / "p0.pfm", tmp_path / "p1.pfm"
        write_float_map(p0, low[0][np.newaxis])
        write_float_map(p1, low[1][np.newaxis])
        guide = tmp_path / "guide.pfm"
        write_float_map(guide, sc.guide)
        out = tmp_path / "labels.png"
        result = _invoke(
            runner,
            ["refine", str(guide), "--probs", str(p0), "--probs", str(p1),
             "--ss", "4", "--iters", "200", "--out-labels", str(out)],
        )
        assert result.exit_code == 0
        labels = read_labels(out)
        assert set(np.unique(labels.ids)) <= {0, 1}

    def test_mismatched_ss_exit_1(self, tmp_path, runner):
        probs = tmp_path / "p.pfm"
        write_float_map(probs, np.full((1, 4, 4), 1.0))
        guide = tmp_path / "g.pfm"
        write_float_map(guide, np.zeros((1, 9, 9)))
        result = runner.invoke(
            main,
            ["refine", str(guide), "--probs", str(probs), "--ss", "2",
             "--out-labels", str(tmp_path / "o.png")],
        )
        assert result.exit_code == 1


class TestBench:
    def test_small_bench_reports_and_agrees(self, runner):
        result = _invoke(runner, ["bench", "--size", "64", "--iters", "10"])
        assert result.exit_code == 0
        kv = _parse_kv(result.output)
        assert float(kv["max_abs_diff_vs_reference"]) <= 1e-9
        assert "result_sha256" in kv

    def test_thread_count_does_not_change_result(self, runner):
        h1 = _parse_kv(_invoke(runner, ["bench", "--size", "32", "--iters", "5", "--threads", "1", "--no-check"]).output)
        h4 = _parse_kv(_invoke(runner, ["bench", "--size", "32", "--iters", "5", "--threads", "4", "--no-check"]).output)
        assert h1["result_sha256"] == h4["result_sha256"]

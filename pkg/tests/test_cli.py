import os
import time

import numpy as np
import pytest

from conftest import make_cornell_sample
from graspdet import features
from graspdet.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main


class TestHelp:
    @pytest.mark.parametrize("sub", ["train", "eval", "augment", "features",
                                     "render"])
    def test_subcommand_help_exits_zero(self, sub, capsys):
        assert main([sub, "--help"]) == EXIT_OK
        assert "--" in capsys.readouterr().out

    def test_no_command_is_usage_error(self):
        assert main([]) == EXIT_USAGE


class TestTrain:
    def test_smoke_run_writes_outputs(self, cornell_root, tmp_path):
        out = str(tmp_path / "run")
        t0 = time.monotonic()
        code = main(["train", "--data", str(cornell_root), "--extractor", "toy",
                     "--seed", "7", "--epochs", "1", "--batches-per-epoch", "2",
                     "--batch-size", "4", "--val-batches", "2",
                     "--val-batch-size", "2", "--feature-dim", "64",
                     "--out", out])
        assert code == EXIT_OK
        assert time.monotonic() - t0 < 60
        for name in ("checkpoint.bin", "report.json", "loss.csv"):
            assert os.path.exists(os.path.join(out, name))

    def test_synthetic_run(self, tmp_path):
        out = str(tmp_path / "run")
        code = main(["train", "--synthetic", "24", "--epochs", "1",
                     "--batches-per-epoch", "2", "--batch-size", "8",
                     "--feature-dim", "64", "--out", out])
        assert code == EXIT_OK

    def test_missing_features_flag(self, cornell_root, tmp_path, capsys):
        code = main(["train", "--data", str(cornell_root),
                     "--extractor", "features-file",
                     "--out", str(tmp_path / "x")])
        assert code == EXIT_USAGE
        assert "--features" in capsys.readouterr().err

    def test_missing_data(self, tmp_path, capsys):
        code = main(["train", "--out", str(tmp_path / "x")])
        assert code == EXIT_USAGE
        assert "--data" in capsys.readouterr().err

    def test_config_file_layering(self, cornell_root, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("epochs = 1\nbatch_size = 4\nbatches_per_epoch = 2\n"
                       "val_batches = 1\nval_batch_size = 2\n"
                       "feature_dim = 64\n")
        out = str(tmp_path / "run")
        # flag overrides the file's batches_per_epoch
        code = main(["train", "--data", str(cornell_root), "--config",
                     str(cfg), "--batches-per-epoch", "1", "--out", out])
        assert code == EXIT_OK
        import json
        report = json.load(open(os.path.join(out, "report.json")))
        assert len(report["train_loss"]) == 1

    def test_bad_config_key(self, cornell_root, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("no_such_option = 3\n")
        code = main(["train", "--data", str(cornell_root), "--config",
                     str(cfg), "--out", str(tmp_path / "x")])
        assert code == EXIT_USAGE


class TestEval:
    def _train(self, cornell_root, tmp_path, seed="7"):
        out = str(tmp_path / f"run{seed}")
        assert main(["train", "--data", str(cornell_root), "--seed", seed,
                     "--epochs", "1", "--batches-per-epoch", "2",
                     "--batch-size", "4", "--val-batches", "1",
                     "--val-batch-size", "2", "--feature-dim", "64",
                     "--out", out]) == EXIT_OK
        return os.path.join(out, "checkpoint.bin")

    def test_eval_checkpoint(self, cornell_root, tmp_path, capsys):
        ckpt = self._train(cornell_root, tmp_path)
        out = str(tmp_path / "eval")
        code = main(["eval", "--data", str(cornell_root), "--checkpoint", ckpt,
                     "--feature-dim", "64", "--out", out])
        assert code == EXIT_OK
        assert "accuracy" in capsys.readouterr().out
        assert os.path.exists(os.path.join(out, "verdicts.csv"))

    def test_dim_mismatch_exit_code(self, cornell_root, tmp_path, capsys):
        ckpt = self._train(cornell_root, tmp_path)
        code = main(["eval", "--data", str(cornell_root), "--checkpoint", ckpt,
                     "--feature-dim", "32"])
        assert code == EXIT_DATA
        err = capsys.readouterr().err
        assert "64" in err and "32" in err

    def test_seed_sweep_table(self, tmp_path, capsys):
        code = main(["eval", "--synthetic", "24", "--seeds", "0,1,2",
                     "--epochs", "1", "--batches-per-epoch", "2",
                     "--batch-size", "8", "--feature-dim", "64"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "min" in out and "mean" in out and "max" in out


class TestAugmentPreview:
    def test_writes_pngs(self, cornell_root, tmp_path):
        out = str(tmp_path / "prev")
        code = main(["augment", "--preview", "--data", str(cornell_root),
                     "--out", out])
        assert code == EXIT_OK
        assert len(os.listdir(out)) > 0


class TestFeaturesValidate:
    def test_validate(self, tmp_path, capsys):
        path = str(tmp_path / "f.gfea")
        rng = np.random.default_rng(0)
        features.write_features(
            path, "toy/v1", 8,
            [("a", rng.standard_normal(8).astype(np.float32))])
        assert main(["features", "validate", path]) == EXIT_OK
        out = capsys.readouterr().out
        assert "toy/v1" in out and "dim 8" in out and "count 1" in out
        assert "checksum" in out

    def test_bad_file(self, tmp_path, capsys):
        path = tmp_path / "junk.gfea"
        path.write_bytes(b"not a feature file")
        assert main(["features", "validate", str(path)]) == EXIT_DATA


class TestRender:
    def test_ground_truth_only(self, cornell_root, tmp_path):
        out = str(tmp_path / "render")
        code = main(["render", "--data", str(cornell_root), "--id", "pcd0100",
                     "--out", out])
        assert code == EXIT_OK
        assert os.path.exists(os.path.join(out, "pcd0100.png"))

    def test_unknown_id(self, cornell_root, tmp_path):
        code = main(["render", "--data", str(cornell_root), "--id", "pcd9999",
                     "--out", str(tmp_path / "render")])
        assert code == EXIT_DATA

    def test_with_checkpoint_verdict_suffix(self, cornell_root, tmp_path):
        run = str(tmp_path / "run")
        assert main(["train", "--data", str(cornell_root), "--epochs", "1",
                     "--batches-per-epoch", "2", "--batch-size", "4",
                     "--val-batches", "1", "--val-batch-size", "2",
                     "--feature-dim", "64", "--out", run]) == EXIT_OK
        out = str(tmp_path / "render")
        code = main(["render", "--data", str(cornell_root), "--id", "pcd0100",
                     "--checkpoint", os.path.join(run, "checkpoint.bin"),
                     "--out", out])
        assert code == EXIT_OK
        names = os.listdir(out)
        assert len(names) == 1
        assert names[0].endswith("_ok.png") or names[0].endswith("_fail.png")
